"""Discrete simulator of n processes with bounded clock skew.

One simulation round is one microsecond of real time.  Each process owns a
physical clock that advances by 1 us per round unless it stalls (independent
per-round probability) and never drifts more than the skew bound away from
the slowest clock.  Processes send messages at a per-round Bernoulli rate to
uniformly chosen peers; messages arrive after the minimum delay plus optional
uniform jitter.  Every send/recv event is stamped with a replay-clock
timestamp plus oracle metadata (a plain vector clock and the maximum physical
clock value in the event's causal past) so traces can be checked against
ground truth.

Clocks are only materialized at rounds where something happens: stall draws
between events are aggregated into one binomial draw per process and the skew
cap is applied at each observed round.  All randomness comes from a single
seeded generator with a fixed draw order, so a config (seed included) maps to
exactly one trace.
"""

from __future__ import annotations

import heapq
import json
import os
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .clock import ClockConfig, Timestamp, derive_epoch, advance, receive, fresh_timestamp
from .codec import CodecLayout, EncodedTimestamp, encode, decode

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


class EmptyTrace(ValueError):
    pass


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters.

    alpha is the per-process outbound message rate in messages/second
    (internally a Bernoulli probability of alpha * 1e-6 per round); delta the
    minimum message delay in us; jitter adds a uniform extra delay in
    [0, jitter] us; duration is simulated real time in us.
    """

    clock: ClockConfig
    alpha: float
    delta: int
    duration: int
    seed: int
    jitter: int = 0
    stall_prob: float = 0.1

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.alpha * 1e-6 > 1:
            raise ConfigError(f"alpha {self.alpha}/s exceeds one message per round")
        if self.delta < 1:
            raise ConfigError(f"delta must be >= 1 us, got {self.delta}")
        if self.duration <= 0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if self.jitter < 0:
            raise ConfigError(f"jitter must be >= 0, got {self.jitter}")
        if not (0.0 <= self.stall_prob <= 1.0):
            raise ConfigError(f"stall_prob must be in [0, 1], got {self.stall_prob}")
        if self.alpha > 0 and self.clock.n < 2:
            raise ConfigError("message traffic requires at least 2 processes")


@dataclass(frozen=True)
class EventRecord:
    event_id: int
    proc: int
    kind: str  # local | send | recv
    pt: int
    real_time: int
    repcl: Timestamp
    oracle_vc: tuple
    oracle_mpt: int
    msg_id: Optional[int] = None


@dataclass(frozen=True)
class RunMetrics:
    tau_mean: float
    sigma_mean: float
    counter_event_fraction: float
    max_observed_skew: int
    mean_clock_words: float


@dataclass(frozen=True)
class Trace:
    config: SimConfig
    events: List[EventRecord]
    metrics: RunMetrics


_ZERO_METRICS = RunMetrics(0.0, 0.0, 0.0, 0, 0.0)


def compute_metrics(events: Sequence[EventRecord], clock_cfg: ClockConfig) -> RunMetrics:
    """Per-event storage statistics over a trace.

    tau counts stored offsets per event (the self entry included), sigma
    stored nonzero counters.  The skew figure here is derived from events
    that share a round; the simulator itself tracks the true running value.
    """
    if not events:
        raise EmptyTrace("metrics need at least one event")
    layout = CodecLayout.for_config(clock_cfg)
    tau = 0
    sigma = 0
    with_counters = 0
    words = 0
    by_round: Dict[int, List[int]] = {}
    for ev in events:
        x = len(ev.repcl.offsets)
        tau += x
        sigma += len(ev.repcl.counters)
        if ev.repcl.counters:
            with_counters += 1
        off_words = (x * layout.offset_bits + 63) // 64
        cnt_words = (x * layout.counter_bits + 63) // 64
        words += 2 + off_words + cnt_words
        by_round.setdefault(ev.real_time, []).append(ev.pt)
    k = len(events)
    skew = 0
    for pts in by_round.values():
        if len(pts) > 1:
            skew = max(skew, max(pts) - min(pts))
    return RunMetrics(
        tau_mean=tau / k,
        sigma_mean=sigma / k,
        counter_event_fraction=with_counters / k,
        max_observed_skew=skew,
        mean_clock_words=words / k,
    )


def run(config: SimConfig) -> Trace:
    """Simulate one run; deterministic for a fixed config."""
    cfg = config.clock
    n = cfg.n
    eps_time = cfg.epsilon_time
    rng = np.random.default_rng(config.seed)
    p_send = config.alpha * 1e-6
    q_step = 1.0 - config.stall_prob

    pt = np.zeros(n, dtype=np.int64)
    clocks = [fresh_timestamp(i) for i in range(n)]
    vc = [[0] * n for _ in range(n)]
    mpt = [0] * n

    # (delivery_round, receiver, msg_seq, sender, ts, vc_snapshot, mpt_at_send)
    pending: list = []
    next_send = [None] * n
    if p_send > 0:
        for i in range(n):
            next_send[i] = int(rng.geometric(p_send)) - 1

    events: List[EventRecord] = []
    max_skew = 0
    last_round = 0
    msg_seq = 0

    def advance_window(to_round: int) -> None:
        nonlocal last_round, max_skew
        gap = to_round - last_round
        if gap > 0:
            steps = rng.binomial(gap, q_step, size=n) if q_step > 0 else np.zeros(n, dtype=np.int64)
            raw = pt + steps
            np.minimum(raw, raw.min() + eps_time, out=pt)
            max_skew = max(max_skew, int(pt.max() - pt.min()))
            last_round = to_round

    def emit(proc: int, kind: str, r: int, ts: Timestamp, msg_id: Optional[int]) -> None:
        events.append(
            EventRecord(
                event_id=len(events),
                proc=proc,
                kind=kind,
                pt=int(pt[proc]),
                real_time=r,
                repcl=ts,
                oracle_vc=tuple(vc[proc]),
                oracle_mpt=mpt[proc],
                msg_id=msg_id,
            )
        )

    while True:
        r = config.duration
        if pending:
            r = pending[0][0]
        for i in range(n):
            ns = next_send[i]
            if ns is not None and ns < r:
                r = ns
        if r >= config.duration:
            break
        advance_window(r)

        # deliveries first, in (receiver, msg_seq) order
        while pending and pending[0][0] == r:
            _, recv_proc, mid, _sender, m_ts, m_vc, m_mpt = heapq.heappop(pending)
            epoch_now = derive_epoch(int(pt[recv_proc]), cfg)
            clocks[recv_proc] = receive(clocks[recv_proc], m_ts, epoch_now, cfg)
            me = vc[recv_proc]
            for k in range(n):
                if m_vc[k] > me[k]:
                    me[k] = m_vc[k]
            me[recv_proc] += 1
            mpt[recv_proc] = max(mpt[recv_proc], int(pt[recv_proc]), m_mpt)
            emit(recv_proc, "recv", r, clocks[recv_proc], mid)

        # then sends, in process order
        for i in range(n):
            if next_send[i] != r:
                continue
            epoch_now = derive_epoch(int(pt[i]), cfg)
            clocks[i] = advance(clocks[i], epoch_now, cfg)
            vc[i][i] += 1
            mpt[i] = max(mpt[i], int(pt[i]))
            dest = int(rng.integers(0, n - 1))
            if dest >= i:
                dest += 1
            jit = int(rng.integers(0, config.jitter + 1)) if config.jitter > 0 else 0
            mid = msg_seq
            msg_seq += 1
            emit(i, "send", r, clocks[i], mid)
            due = r + config.delta + jit
            if due < config.duration:
                heapq.heappush(
                    pending, (due, dest, mid, i, clocks[i], tuple(vc[i]), mpt[i])
                )
            next_send[i] = r + int(rng.geometric(p_send))

    advance_window(config.duration - 1)
    if events:
        metrics = replace(compute_metrics(events, cfg), max_observed_skew=max_skew)
    else:
        metrics = replace(_ZERO_METRICS, max_observed_skew=max_skew)
    return Trace(config=config, events=events, metrics=metrics)


def _config_to_dict(config: SimConfig) -> dict:
    return {
        "clock": {
            "n": config.clock.n,
            "epsilon_time": config.clock.epsilon_time,
            "interval": config.clock.interval,
        },
        "alpha": config.alpha,
        "delta": config.delta,
        "duration": config.duration,
        "seed": config.seed,
        "jitter": config.jitter,
        "stall_prob": config.stall_prob,
    }


def _config_from_dict(d: dict) -> SimConfig:
    clk = d["clock"]
    return SimConfig(
        clock=ClockConfig(n=clk["n"], epsilon_time=clk["epsilon_time"], interval=clk["interval"]),
        alpha=d["alpha"],
        delta=d["delta"],
        duration=d["duration"],
        seed=d["seed"],
        jitter=d.get("jitter", 0),
        stall_prob=d.get("stall_prob", 0.1),
    )


def _event_to_dict(ev: EventRecord, layout: CodecLayout) -> dict:
    ts = ev.repcl
    return {
        "event_id": ev.event_id,
        "proc": ev.proc,
        "kind": ev.kind,
        "pt": ev.pt,
        "real_time": ev.real_time,
        "msg_id": ev.msg_id,
        "repcl": {
            "mx": ts.mx,
            "offsets": {str(k): v for k, v in sorted(ts.offsets.items())},
            "counters": {str(k): v for k, v in sorted(ts.counters.items())},
        },
        "repcl_words": encode(ts, layout).hex_words(),
        "oracle_vc": list(ev.oracle_vc),
        "oracle_mpt": ev.oracle_mpt,
    }


def _event_from_dict(d: dict) -> EventRecord:
    rep = d["repcl"]
    ts = Timestamp(
        mx=rep["mx"],
        offsets={int(k): v for k, v in rep["offsets"].items()},
        counters={int(k): v for k, v in rep["counters"].items()},
        owner=d["proc"],
    )
    return EventRecord(
        event_id=d["event_id"],
        proc=d["proc"],
        kind=d["kind"],
        pt=d["pt"],
        real_time=d["real_time"],
        repcl=ts,
        oracle_vc=tuple(d["oracle_vc"]),
        oracle_mpt=d["oracle_mpt"],
        msg_id=d["msg_id"],
    )


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_trace(trace: Trace, path: str) -> None:
    """One JSON object per line; the header carries config and run metrics."""
    layout = CodecLayout.for_config(trace.config.clock)
    header = {
        "schema_version": SCHEMA_VERSION,
        "sim_config": _config_to_dict(trace.config),
        "metrics": {
            "tau_mean": trace.metrics.tau_mean,
            "sigma_mean": trace.metrics.sigma_mean,
            "counter_event_fraction": trace.metrics.counter_event_fraction,
            "max_observed_skew": trace.metrics.max_observed_skew,
            "mean_clock_words": trace.metrics.mean_clock_words,
        },
    }
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(_dumps(header) + "\n")
        for ev in trace.events:
            fh.write(_dumps(_event_to_dict(ev, layout)) + "\n")
    os.replace(tmp, path)


def read_trace(path: str) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise TraceFormatError("empty trace file")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"bad header: {exc}") from exc
        if header.get("schema_version") != SCHEMA_VERSION:
            raise TraceFormatError(
                f"unsupported schema version {header.get('schema_version')!r}"
            )
        try:
            config = _config_from_dict(header["sim_config"])
            m = header["metrics"]
            metrics = RunMetrics(
                tau_mean=m["tau_mean"],
                sigma_mean=m["sigma_mean"],
                counter_event_fraction=m["counter_event_fraction"],
                max_observed_skew=m["max_observed_skew"],
                mean_clock_words=m["mean_clock_words"],
            )
        except (KeyError, TypeError) as exc:
            raise TraceFormatError(f"malformed header: {exc}") from exc
        layout = CodecLayout.for_config(config.clock)
        events = []
        for i, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                ev = _event_from_dict(d)
                # words must agree with the structural form
                enc = EncodedTimestamp.from_hex_words(d["repcl_words"])
                if decode(enc, layout, owner=ev.proc) != ev.repcl:
                    raise TraceFormatError(f"line {i}: words disagree with repcl fields")
            except TraceFormatError:
                raise
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise TraceFormatError(f"line {i}: {exc}") from exc
            events.append(ev)
    return Trace(config=config, events=events, metrics=metrics)
