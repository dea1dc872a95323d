"""Parameter sweeps, feasibility regions, and partial-replay analysis.

A sweep runs the simulator over a parameter grid and tabulates the per-run
storage metrics; feasibility classifies (alpha, delta) cells by whether the
mean offset count stays within a user budget; the partial-replay report
restamps a trace under a smaller declared skew bound and quantifies what that
costs (concurrent pairs forced into an order) and what it preserves
(causality and far-apart ordering).
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .clock import ClockConfig, Timestamp, advance, derive_epoch, fresh_timestamp, receive
from .sim import ConfigError, EventRecord, SimConfig, Trace, run
from .verify import TraceArrays, arrays_from_events, pairwise_report, timestamp_arrays


class AnalysisError(ValueError):
    pass


class InvalidSkew(AnalysisError):
    pass


GRID_KEYS = ("n", "epsilon_time", "interval", "alpha", "delta")


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition: lists per parameter, shared fixed values, repeats."""

    grid: Dict[str, List]
    fixed: Dict[str, object] = field(default_factory=dict)
    repeats: int = 1
    seed_base: int = 0

    def __post_init__(self) -> None:
        unknown = set(self.grid) - set(GRID_KEYS)
        if unknown:
            raise AnalysisError(f"unknown grid keys: {sorted(unknown)}")
        if self.repeats < 1:
            raise AnalysisError("repeats must be >= 1")
        for key in GRID_KEYS:
            if not self.grid.get(key) and key not in self.fixed:
                raise AnalysisError(f"parameter {key} needs grid values or a fixed value")

    def values(self, key: str) -> List:
        vals = self.grid.get(key)
        if vals:
            return list(vals)
        return [self.fixed[key]]


@dataclass
class SweepResult:
    rows: List[dict]
    errors: List[dict]


def _cell_config(spec: SweepSpec, cell: Dict[str, object], seed: int) -> SimConfig:
    clock = ClockConfig(
        n=int(cell["n"]),
        epsilon_time=int(cell["epsilon_time"]),
        interval=int(cell["interval"]),
    )
    return SimConfig(
        clock=clock,
        alpha=float(cell["alpha"]),
        delta=int(cell["delta"]),
        duration=int(spec.fixed.get("duration", 1_000_000)),
        seed=seed,
        jitter=int(spec.fixed.get("jitter", 0)),
        stall_prob=float(spec.fixed.get("stall_prob", 0.1)),
    )


def sweep(spec: SweepSpec) -> SweepResult:
    """One row per grid cell per repeat; bad cells are reported, not fatal."""
    rows: List[dict] = []
    errors: List[dict] = []
    cells = list(itertools.product(*(spec.values(k) for k in GRID_KEYS)))
    for cell_idx, combo in enumerate(cells):
        cell = dict(zip(GRID_KEYS, combo))
        for rep in range(spec.repeats):
            seed = spec.seed_base + cell_idx * spec.repeats + rep
            try:
                config = _cell_config(spec, cell, seed)
                trace = run(config)
            except (ConfigError, ValueError) as exc:
                errors.append({**cell, "repeat": rep, "error": str(exc)})
                break
            m = trace.metrics
            rows.append(
                {
                    **cell,
                    "repeat": rep,
                    "seed": seed,
                    "events": len(trace.events),
                    "tau_mean": m.tau_mean,
                    "sigma_mean": m.sigma_mean,
                    "counter_event_fraction": m.counter_event_fraction,
                    "max_observed_skew": m.max_observed_skew,
                    "mean_clock_words": m.mean_clock_words,
                }
            )
    return SweepResult(rows=rows, errors=errors)


@dataclass
class FeasibilityRegion:
    tau_budget: float
    cells: Dict[Tuple[float, int], str]  # (alpha, delta) -> feasible | infeasible
    boundary: List[Tuple[float, int]]
    tau_means: Dict[Tuple[float, int], float]

    def feasible_cells(self) -> List[Tuple[float, int]]:
        return sorted(k for k, v in self.cells.items() if v == "feasible")


def feasibility(spec: SweepSpec, tau_budget: float) -> FeasibilityRegion:
    """Classify each (alpha, delta) cell by the measured mean offset count.

    The grid must vary only alpha and delta; n, the skew bound and the
    interval are held fixed.  The boundary lists feasible cells adjacent to
    an infeasible one on the (alpha, delta) lattice.
    """
    for key in ("n", "epsilon_time", "interval"):
        if len(spec.values(key)) != 1:
            raise AnalysisError(f"feasibility needs a single value for {key}")
    result = sweep(spec)
    if result.errors:
        raise AnalysisError(f"feasibility sweep had failing cells: {result.errors}")
    by_cell: Dict[Tuple[float, int], List[float]] = {}
    for row in result.rows:
        by_cell.setdefault((row["alpha"], row["delta"]), []).append(row["tau_mean"])
    cells = {}
    tau_means = {}
    for key, taus in by_cell.items():
        mean = sum(taus) / len(taus)
        tau_means[key] = mean
        cells[key] = "feasible" if mean <= tau_budget else "infeasible"

    alphas = sorted({a for a, _ in cells})
    deltas = sorted({d for _, d in cells})
    boundary = []
    for (a, d), verdict in cells.items():
        if verdict != "feasible":
            continue
        ai, di = alphas.index(a), deltas.index(d)
        for na, nd in ((ai - 1, di), (ai + 1, di), (ai, di - 1), (ai, di + 1)):
            if 0 <= na < len(alphas) and 0 <= nd < len(deltas):
                if cells.get((alphas[na], deltas[nd])) == "infeasible":
                    boundary.append((a, d))
                    break
    return FeasibilityRegion(
        tau_budget=tau_budget, cells=cells, boundary=sorted(boundary), tau_means=tau_means
    )


def restamp_trace(events: Sequence[EventRecord], cfg: ClockConfig) -> List[Timestamp]:
    """Re-run the clock update rules over a recorded event structure.

    Uses each event's recorded local physical time and the trace's message
    pairing, so the only thing that changes is the declared clock config.
    """
    state: Dict[int, Timestamp] = {}
    send_stamps: Dict[int, Timestamp] = {}
    out: List[Timestamp] = []
    for ev in events:
        ts = state.get(ev.proc)
        if ts is None:
            ts = fresh_timestamp(ev.proc)
        epoch_now = derive_epoch(ev.pt, cfg)
        if ev.kind == "recv":
            if ev.msg_id not in send_stamps:
                raise AnalysisError(f"recv event {ev.event_id} references unknown message {ev.msg_id}")
            ts = receive(ts, send_stamps[ev.msg_id], epoch_now, cfg)
        else:
            ts = advance(ts, epoch_now, cfg)
            if ev.kind == "send":
                send_stamps[ev.msg_id] = ts
        state[ev.proc] = ts
        out.append(ts)
    return out


@dataclass
class PartialReplayReport:
    declared_eps_time: int
    actual_eps_time: int
    requirement1_violations: int
    requirement2_violations: int
    concurrent_pairs: int
    baseline_ordered_concurrent: int
    declared_ordered_concurrent: int
    forced_order_count: int
    forced_order_fraction: float


def partial_replay_report(trace: Trace, declared_eps_time: int) -> PartialReplayReport:
    """Restamp under a smaller declared skew bound and report the effect.

    Confirms that causality and the far-apart ordering requirement still hold
    and counts how many oracle-concurrent pairs the smaller bound forces into
    a fixed order beyond what the trace's own bound already forced.
    """
    base_cfg = trace.config.clock
    interval = base_cfg.interval
    if declared_eps_time % interval != 0 or declared_eps_time < interval:
        raise InvalidSkew(
            f"declared skew bound {declared_eps_time} must be a positive multiple "
            f"of the interval {interval}"
        )
    if declared_eps_time > base_cfg.epsilon_time:
        raise InvalidSkew(
            f"declared skew bound {declared_eps_time} exceeds the trace's "
            f"{base_cfg.epsilon_time}"
        )
    if not trace.events:
        raise AnalysisError("partial replay needs a non-empty trace")

    base_arrays = arrays_from_events(trace.events, base_cfg)
    base_rep = pairwise_report(base_arrays, count_concurrent=True)

    declared_cfg = ClockConfig(
        n=base_cfg.n, epsilon_time=declared_eps_time, interval=interval
    )
    stamps = restamp_trace(trace.events, declared_cfg)
    mx, know, cnt = timestamp_arrays(stamps, declared_cfg)
    declared_arrays = TraceArrays(
        event_ids=base_arrays.event_ids,
        mx=mx,
        knowledge=know,
        counters=cnt,
        vc=base_arrays.vc,
        mpt=base_arrays.mpt,
        epsilon=declared_cfg.epsilon,
    )
    declared_rep = pairwise_report(
        declared_arrays, eps_time=declared_eps_time, interval=interval,
        count_concurrent=True,
    )
    # sweep tallies are over ordered pairs; report unordered pairs
    base_ordered = base_rep.ordered_concurrent_pairs // 2
    declared_ordered = declared_rep.ordered_concurrent_pairs // 2
    total_conc = declared_rep.concurrent_pairs // 2
    forced = max(0, declared_ordered - base_ordered)
    return PartialReplayReport(
        declared_eps_time=declared_eps_time,
        actual_eps_time=base_cfg.epsilon_time,
        requirement1_violations=declared_rep.causality_violations,
        requirement2_violations=declared_rep.far_mpt_violations,
        concurrent_pairs=total_conc,
        baseline_ordered_concurrent=base_ordered,
        declared_ordered_concurrent=declared_ordered,
        forced_order_count=forced,
        forced_order_fraction=forced / total_conc if total_conc else 0.0,
    )


def emit_csv(table: List[dict], path: str) -> None:
    """RFC-4180-style CSV with the first row's keys as the fixed header."""
    if not table:
        raise AnalysisError("cannot emit an empty table")
    fieldnames = list(table[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, quoting=csv.QUOTE_MINIMAL)
        writer.writeheader()
        for row in table:
            writer.writerow(row)


def emit_plot_data(
    table: List[dict],
    x_axis: str,
    series_key: str,
    path: str,
    y_axis: str = "tau_mean",
) -> None:
    """One JSON object per (series, x) point: {x, series, y, stderr}.

    Rows sharing a series label and x value (repeats) are aggregated into a
    mean and its standard error.
    """
    if not table:
        raise AnalysisError("cannot emit an empty table")
    groups: Dict[Tuple[object, object], List[float]] = {}
    for row in table:
        if x_axis not in row or series_key not in row or y_axis not in row:
            raise AnalysisError(
                f"rows lack required fields {x_axis!r}/{series_key!r}/{y_axis!r}"
            )
        groups.setdefault((row[series_key], row[x_axis]), []).append(float(row[y_axis]))
    if not groups:
        raise AnalysisError("no series to emit")
    with open(path, "w", encoding="utf-8") as fh:
        for (series, x) in sorted(groups, key=lambda kv: (repr(kv[0]), repr(kv[1]))):
            ys = groups[(series, x)]
            mean = sum(ys) / len(ys)
            if len(ys) > 1:
                var = sum((y - mean) ** 2 for y in ys) / (len(ys) - 1)
                stderr = (var / len(ys)) ** 0.5
            else:
                stderr = 0.0
            fh.write(
                json.dumps(
                    {"x": x, "series": series, "y": mean, "stderr": stderr},
                    sort_keys=True,
                )
                + "\n"
            )


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation (average ranks for ties)."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise AnalysisError("spearman needs two equal-length series of >= 2 points")

    def ranks(vals: Sequence[float]) -> List[float]:
        order = sorted(range(len(vals)), key=lambda i: vals[i])
        out = [0.0] * len(vals)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and vals[order[j + 1]] == vals[order[i]]:
                j += 1
            avg = (i + j) / 2 + 1
            for idx in order[i : j + 1]:
                out[idx] = avg
            i = j + 1
        return out

    rx, ry = ranks(xs), ranks(ys)
    mean_x = sum(rx) / len(rx)
    mean_y = sum(ry) / len(ry)
    num = sum((a - mean_x) * (b - mean_y) for a, b in zip(rx, ry))
    den_x = sum((a - mean_x) ** 2 for a in rx) ** 0.5
    den_y = sum((b - mean_y) ** 2 for b in ry) ** 0.5
    if den_x == 0 or den_y == 0:
        return 0.0
    return num / (den_x * den_y)
