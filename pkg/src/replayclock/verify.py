"""Vectorized pairwise property checks over traces.

Checking a trace quantifies over all event pairs, which is quadratic, but the
timestamp order has structure: any pair more than epsilon epochs apart is
ordered by the far-epoch clause alone, so the expensive vector-dominance
comparisons only matter for pairs whose mx values sit within epsilon of each
other.  Events are therefore sorted by mx and compared band-by-band; the
cheap integer checks (epoch gaps, mpt gaps) still sweep every pair.

Happened-before outside the band cannot produce violations as long as mx
never decreases along a process line or a message edge, which
``mx_edge_violations`` verifies directly; the full vector-clock sweep is only
needed when totals over all concurrent pairs are requested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .clock import ClockConfig, Timestamp
from .sim import EventRecord

_BLOCK = 512


@dataclass(frozen=True)
class TraceArrays:
    """Dense per-event views of a trace, indexed by event position."""

    event_ids: np.ndarray  # (k,)
    mx: np.ndarray  # (k,)
    knowledge: np.ndarray  # (k, n)
    counters: np.ndarray  # (k, n)
    vc: np.ndarray  # (k, n)
    mpt: np.ndarray  # (k,)
    epsilon: int

    @property
    def size(self) -> int:
        return len(self.mx)


def timestamp_arrays(
    timestamps: Sequence[Timestamp], cfg: ClockConfig
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(mx, knowledge, counters) dense arrays for a list of timestamps."""
    k = len(timestamps)
    mx = np.zeros(k, dtype=np.int64)
    know = np.zeros((k, cfg.n), dtype=np.int64)
    cnt = np.zeros((k, cfg.n), dtype=np.int64)
    eps = cfg.epsilon
    for i, ts in enumerate(timestamps):
        mx[i] = ts.mx
        know[i, :] = ts.mx - eps
        for p, off in ts.offsets.items():
            know[i, p] = ts.mx - off
        for p, c in ts.counters.items():
            cnt[i, p] = c
    return mx, know, cnt


def arrays_from_events(events: Sequence[EventRecord], cfg: ClockConfig) -> TraceArrays:
    mx, know, cnt = timestamp_arrays([ev.repcl for ev in events], cfg)
    vc = np.array([ev.oracle_vc for ev in events], dtype=np.int64)
    mpt = np.array([ev.oracle_mpt for ev in events], dtype=np.int64)
    ids = np.array([ev.event_id for ev in events], dtype=np.int64)
    return TraceArrays(
        event_ids=ids, mx=mx, knowledge=know, counters=cnt, vc=vc, mpt=mpt,
        epsilon=cfg.epsilon,
    )


def mx_edge_violations(events: Sequence[EventRecord]) -> int:
    """Pairs along a process line or a message edge where mx decreases.

    Zero means mx is monotone along every happened-before path (the relation
    is the transitive closure of exactly these edges), which in turn means no
    happened-before pair can sit more than epsilon epochs apart in the wrong
    direction.
    """
    bad = 0
    last_mx: dict = {}
    send_mx: dict = {}
    for ev in events:
        mx = ev.repcl.mx
        prev = last_mx.get(ev.proc)
        if prev is not None and mx < prev:
            bad += 1
        last_mx[ev.proc] = mx
        if ev.kind == "send":
            send_mx[ev.msg_id] = mx
        elif ev.kind == "recv":
            origin = send_mx.get(ev.msg_id)
            if origin is not None and mx < origin:
                bad += 1
    return bad


def mpt_epoch_violations(events: Sequence[EventRecord], cfg: ClockConfig) -> int:
    """Events whose mx is not exactly floor(mpt / interval)."""
    return sum(1 for ev in events if ev.repcl.mx != ev.oracle_mpt // cfg.interval)


def _dominance_band(
    a_rows: np.ndarray, b_cols: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Componentwise comparisons for a (rows x cols) rectangle.

    Returns (le, lt, ge, gt): le[i,j] iff row vector i <= col vector j in
    every component, lt iff strictly smaller somewhere; ge/gt mirrored.
    Computed via running min/max of per-component differences.
    """
    rows, n = a_rows.shape
    cols = b_cols.shape[0]
    dmin = np.empty((rows, cols), dtype=np.int64)
    dmax = np.empty((rows, cols), dtype=np.int64)
    buf = np.empty((rows, cols), dtype=np.int64)
    for l in range(n):
        np.subtract(b_cols[:, l][None, :], a_rows[:, l][:, None], out=buf)
        if l == 0:
            dmin[:] = buf
            dmax[:] = buf
        else:
            np.minimum(dmin, buf, out=dmin)
            np.maximum(dmax, buf, out=dmax)
    return dmin >= 0, dmax > 0, dmax <= 0, dmin < 0


@dataclass
class PairwiseReport:
    """Tallies from one blocked sweep over all ordered event pairs.

    When ``count_concurrent`` was off, hb/concurrent tallies cover only pairs
    within epsilon epochs of each other (the only place violations can hide,
    given a zero mx_edge_violations count)."""

    hb_pairs: int = 0
    causality_violations: int = 0
    close_concurrent_pairs: int = 0
    bounded_concurrency_violations: int = 0
    far_mpt_pairs: int = 0
    far_mpt_violations: int = 0
    close_mpt_concurrent_pairs: int = 0
    close_mpt_violations: int = 0
    mpt_band_escapes: int = 0
    concurrent_pairs: int = 0
    ordered_concurrent_pairs: int = 0
    band_limited: bool = True
    samples: List[Tuple[str, int, int]] = field(default_factory=list)


def pairwise_report(
    arrays: TraceArrays,
    eps_time: int | None = None,
    interval: int | None = None,
    count_concurrent: bool = False,
    max_samples: int = 8,
) -> PairwiseReport:
    """Check every ordered event pair against the replay contracts.

    Per ordered pair (i, j):
      * i hb j (by vector clock) must imply i ordered before j;
      * oracle-concurrent with |mx difference| <= epsilon must be concurrent;
      * mpt gap beyond eps_time + interval must be ordered before;
      * oracle-concurrent within eps_time - interval of mpt must be concurrent.

    With ``count_concurrent`` the sweep also totals oracle-concurrent pairs
    and how many of them the timestamps order anyway (every pair past the
    epsilon band is ordered by construction); that needs the full-width
    vector-clock comparison and costs accordingly.
    """
    rep = PairwiseReport(band_limited=not count_concurrent)
    k = arrays.size
    if k == 0:
        return rep
    eps = arrays.epsilon
    order = np.argsort(arrays.mx, kind="stable")
    mx = np.ascontiguousarray(arrays.mx[order])
    know = np.ascontiguousarray(arrays.knowledge[order])
    cnt = np.ascontiguousarray(arrays.counters[order])
    vc = np.ascontiguousarray(arrays.vc[order])
    mpt = np.ascontiguousarray(arrays.mpt[order])
    ids = arrays.event_ids[order]

    def sample(kind: str, mask: np.ndarray, row0: int, col0: int) -> None:
        if len(rep.samples) >= max_samples or not mask.any():
            return
        ii, jj = np.nonzero(mask)
        for a, b in zip(ii, jj):
            if len(rep.samples) >= max_samples:
                break
            rep.samples.append((kind, int(ids[row0 + a]), int(ids[col0 + b])))

    for r0 in range(0, k, _BLOCK):
        r1 = min(r0 + _BLOCK, k)
        rows = slice(r0, r1)
        nrows = r1 - r0
        mr = mx[rows][:, None]

        lo = int(np.searchsorted(mx, mx[r0] - eps, side="left"))
        hi = int(np.searchsorted(mx, mx[r1 - 1] + eps, side="right"))
        cols = slice(lo, hi)
        mc = mx[cols][None, :]

        in_band = np.abs(mc - mr) <= eps
        not_self = np.ones((nrows, hi - lo), dtype=bool)
        diag = np.arange(r0, r1)
        not_self[diag - r0, diag - lo] = False

        k_le, k_lt, k_ge, k_gt = _dominance_band(know[rows], know[cols])
        k_eq = k_le & k_ge
        c_le, c_lt, c_ge, c_gt = _dominance_band(cnt[rows], cnt[cols])
        lt_band = (mc > mr + eps) | (in_band & k_le & k_lt) | (k_eq & c_le & c_lt)
        gt_band = (mr > mc + eps) | (in_band & k_ge & k_gt) | (k_eq & c_ge & c_gt)
        ordered_band = lt_band | gt_band

        h_le, h_lt, h_ge, h_gt = _dominance_band(vc[rows], vc[cols])
        hb_band = h_le & h_lt
        hb_rev_band = h_ge & h_gt
        conc_band = ~hb_band & ~hb_rev_band & not_self

        checked = in_band & not_self
        hb_checked = hb_band & checked
        rep.hb_pairs += int(hb_checked.sum())
        viol = hb_checked & ~lt_band
        rep.causality_violations += int(viol.sum())
        sample("causality", viol, r0, lo)

        cc = conc_band & in_band
        rep.close_concurrent_pairs += int(cc.sum())
        viol = cc & ordered_band
        rep.bounded_concurrency_violations += int(viol.sum())
        sample("bounded-concurrency", viol, r0, lo)

        if eps_time is not None and interval is not None:
            gap_full = mpt[None, :] - mpt[rows][:, None]
            far_full = gap_full > eps_time + interval
            rep.far_mpt_pairs += int(far_full.sum())
            # outside the band every pair is far-epoch ordered; violations can
            # only hide where mx values are close
            lt_full = mx[None, :] > mr + eps
            lt_full[:, cols] = lt_band
            viol_full = far_full & ~lt_full
            rep.far_mpt_violations += int(viol_full.sum())
            sample("far-mpt", viol_full, r0, 0)

            near_full = np.abs(gap_full) <= eps_time - interval
            outside = np.ones((nrows, k), dtype=bool)
            outside[:, cols] = ~in_band
            escapes = near_full & outside
            rep.mpt_band_escapes += int(escapes.sum())

            near = near_full[:, cols] & conc_band & in_band
            rep.close_mpt_concurrent_pairs += int(near.sum())
            viol = near & ordered_band
            rep.close_mpt_violations += int(viol.sum())
            sample("close-mpt", viol, r0, lo)

        if count_concurrent:
            h_le, h_lt, h_ge, h_gt = _dominance_band(vc[rows], vc)
            hb_full = h_le & h_lt
            hb_rev_full = h_ge & h_gt
            ns_full = np.ones((nrows, k), dtype=bool)
            ns_full[diag - r0, diag] = False
            conc_full = ~hb_full & ~hb_rev_full & ns_full
            rep.hb_pairs += int((hb_full & ns_full).sum()) - int(hb_checked.sum())
            rep.concurrent_pairs += int(conc_full.sum())
            conc_out = int(conc_full.sum()) - int(cc.sum())
            # everything outside the band is ordered by the far-epoch clause
            rep.ordered_concurrent_pairs += conc_out
            rep.ordered_concurrent_pairs += int((cc & ordered_band).sum())
    return rep


def pairwise_report_slow(
    events: Sequence[EventRecord], cfg: ClockConfig,
) -> PairwiseReport:
    """Reference implementation: every pair through clock.compare.

    Quadratic and slow; exists so the fast sweep has an independent oracle on
    small traces.
    """
    from .clock import Ordering, compare

    rep = PairwiseReport(band_limited=False)
    eps = cfg.epsilon
    eps_time, interval = cfg.epsilon_time, cfg.interval
    k = len(events)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            e, f = events[i], events[j]
            order = compare(e.repcl, f.repcl, cfg)
            lt = order is Ordering.BEFORE
            is_ordered = order is not Ordering.CONCURRENT
            hb = all(a <= b for a, b in zip(e.oracle_vc, f.oracle_vc)) and any(
                a < b for a, b in zip(e.oracle_vc, f.oracle_vc)
            )
            hb_rev = all(b <= a for a, b in zip(e.oracle_vc, f.oracle_vc)) and any(
                b < a for a, b in zip(e.oracle_vc, f.oracle_vc)
            )
            conc = not hb and not hb_rev
            close = abs(e.repcl.mx - f.repcl.mx) <= eps
            if hb:
                rep.hb_pairs += 1
                if not lt:
                    rep.causality_violations += 1
                    rep.samples.append(("causality", e.event_id, f.event_id))
            if conc and close:
                rep.close_concurrent_pairs += 1
                if is_ordered:
                    rep.bounded_concurrency_violations += 1
            gap = f.oracle_mpt - e.oracle_mpt
            if gap > eps_time + interval:
                rep.far_mpt_pairs += 1
                if not lt:
                    rep.far_mpt_violations += 1
            if abs(gap) <= eps_time - interval and not close:
                rep.mpt_band_escapes += 1
            if conc and abs(gap) <= eps_time - interval and close:
                rep.close_mpt_concurrent_pairs += 1
                if is_ordered:
                    rep.close_mpt_violations += 1
            if conc:
                rep.concurrent_pairs += 1
                if is_ordered:
                    rep.ordered_concurrent_pairs += 1
    return rep
