"""Frontline-based trace replay.

At every step the frontline is the set of remaining events that no other
remaining event must precede; replay repeatedly removes one frontline element
(randomly, or by interactive choice) until the trace is exhausted.  Every
ordering produced this way, and only those, respects the timestamp order.

Frontline computation exploits the epoch structure: only events within
epsilon epochs of the smallest remaining mx can be frontline, and an event
can only be preceded by events within epsilon epochs of itself, so each
recomputation touches a small sliding window rather than all pairs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .clock import ClockConfig, Timestamp, _less_than
from .sim import Trace

DEFAULT_ENUMERATION_GUARD = 12


class ReplayError(ValueError):
    pass


class NotInFrontline(ReplayError):
    def __init__(self, event_id: int, frontline: Set[int]):
        self.event_id = event_id
        self.frontline = set(frontline)
        super().__init__(
            f"event {event_id} is not in the current frontline {sorted(frontline)}"
        )


class NotAPermutation(ReplayError):
    pass


class TooLarge(ReplayError):
    pass


RemainingLike = Union[Mapping[int, Timestamp], Iterable[Tuple[int, Timestamp]]]


def _as_dict(remaining: RemainingLike) -> Dict[int, Timestamp]:
    if isinstance(remaining, Mapping):
        return dict(remaining)
    return dict(remaining)


def frontline(remaining: RemainingLike, cfg: ClockConfig) -> Set[int]:
    """The ids of the order-minimal elements of ``remaining``."""
    items = _as_dict(remaining)
    if not items:
        return set()
    eps = cfg.epsilon
    min_mx = min(ts.mx for ts in items.values())
    # anything beyond min_mx + eps is preceded by the minimum-epoch event
    window = [(i, ts) for i, ts in items.items() if ts.mx <= min_mx + eps]
    # predecessors of a window event sit within eps epochs of it
    preds = [(j, ts) for j, ts in items.items() if ts.mx <= min_mx + 2 * eps]
    out: Set[int] = set()
    for i, ts in window:
        for j, tf in preds:
            if j == i or tf.mx > ts.mx + eps:
                continue
            if _less_than(tf, ts, cfg):
                break
        else:
            out.add(i)
    return out


@dataclass
class ReplaySession:
    """Mutable what-if replay state over one trace."""

    cfg: ClockConfig
    seed: int
    remaining: Dict[int, Timestamp]
    frontline: Set[int]
    chosen_prefix: List[int] = field(default_factory=list)
    _initial: Dict[int, Timestamp] = field(default_factory=dict, repr=False)
    _rng: random.Random = field(default_factory=random.Random, repr=False)

    @property
    def done(self) -> bool:
        return not self.remaining


def session_new(trace: Trace, seed: int) -> ReplaySession:
    stamps = {ev.event_id: ev.repcl for ev in trace.events}
    cfg = trace.config.clock
    session = ReplaySession(
        cfg=cfg,
        seed=seed,
        remaining=dict(stamps),
        frontline=frontline(stamps, cfg),
        _initial=dict(stamps),
        _rng=random.Random(seed),
    )
    return session


def session_step(session: ReplaySession, event_id: int) -> None:
    """Replay one chosen frontline event."""
    if event_id not in session.frontline:
        raise NotInFrontline(event_id, session.frontline)
    del session.remaining[event_id]
    session.chosen_prefix.append(event_id)
    session.frontline = frontline(session.remaining, session.cfg)


def session_auto_step(session: ReplaySession) -> Optional[int]:
    """Replay one uniformly drawn frontline event; None when done."""
    if not session.remaining:
        return None
    choices = sorted(session.frontline)
    picked = choices[session._rng.randrange(len(choices))]
    session_step(session, picked)
    return picked


def session_reset(session: ReplaySession) -> None:
    """Restore the initial state, keeping (and re-arming) the seed."""
    session.remaining = dict(session._initial)
    session.chosen_prefix = []
    session.frontline = frontline(session.remaining, session.cfg)
    session._rng = random.Random(session.seed)


def replay_random(trace: Trace, seed: int) -> List[int]:
    """One complete random replay; deterministic per seed."""
    session = session_new(trace, seed)
    while not session.done:
        session_auto_step(session)
    return list(session.chosen_prefix)


def enumerate_replays(
    trace: Trace, limit: int = DEFAULT_ENUMERATION_GUARD
) -> Set[Tuple[int, ...]]:
    """The exact set of orderings consistent with the timestamp order.

    Brute-force enumeration of the linear extensions; refuses traces larger
    than ``limit`` events (raise the limit explicitly to override).
    """
    events = trace.events
    k = len(events)
    if k > limit:
        raise TooLarge(
            f"{k} events exceeds the enumeration guard of {limit}; "
            f"pass a higher limit to override"
        )
    cfg = trace.config.clock
    ids = [ev.event_id for ev in events]
    stamps = [ev.repcl for ev in events]
    pred_mask = [0] * k
    for i in range(k):
        for j in range(k):
            if i != j and _less_than(stamps[j], stamps[i], cfg):
                pred_mask[i] |= 1 << j

    results: Set[Tuple[int, ...]] = set()
    order: List[int] = []

    def walk(remaining_mask: int) -> None:
        if remaining_mask == 0:
            results.add(tuple(order))
            return
        for i in range(k):
            bit = 1 << i
            if remaining_mask & bit and not (pred_mask[i] & remaining_mask & ~bit):
                order.append(ids[i])
                walk(remaining_mask & ~bit)
                order.pop()

    walk((1 << k) - 1)
    return results


def validate_order(
    ordering: Sequence[int], trace: Trace, cfg: Optional[ClockConfig] = None
) -> Tuple[bool, Optional[Tuple[int, int]]]:
    """Check that an ordering never schedules an event after one it precedes.

    Returns (True, None) when valid, else (False, (should_be_first, other))
    for the first violation encountered.  The ordering must be a permutation
    of the trace's event ids.
    """
    if cfg is None:
        cfg = trace.config.clock
    stamps = {ev.event_id: ev.repcl for ev in trace.events}
    if sorted(ordering) != sorted(stamps):
        raise NotAPermutation("ordering is not a permutation of the trace's event ids")
    eps = cfg.epsilon
    seen: List[Tuple[int, Timestamp]] = []
    for eid in ordering:
        ts = stamps[eid]
        for prior_id, prior_ts in seen:
            # ts < prior_ts requires prior mx within (mx, mx + eps] via the
            # far clause or within eps for dominance; skip the rest cheaply
            if prior_ts.mx > ts.mx + eps or abs(prior_ts.mx - ts.mx) <= eps:
                if _less_than(ts, prior_ts, cfg):
                    return False, (eid, prior_id)
        seen.append((eid, ts))
    return True, None
