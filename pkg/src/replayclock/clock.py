"""Replay-clock timestamps over a bounded-skew system.

A timestamp is a triple (mx, offsets, counters) kept per process:

* ``mx`` is the largest epoch the process is aware of, where an epoch is the
  local physical clock discretized into intervals of length ``interval``.
* ``offsets[k]`` encodes how far behind ``mx`` the last known epoch of
  process ``k`` is.  Offsets are stored sparsely: an absent entry means the
  no-information value ``epsilon`` (the skew bound in epochs), because clock
  synchronization already guarantees nobody is further behind than that.
* ``counters[k]`` disambiguates multiple events that fall into the same epoch
  with identical epoch knowledge; they are compared like vector clocks.

All operations are pure: they take timestamps and return fresh ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Optional


class ClockError(ValueError):
    """Invalid clock configuration or misuse of a clock operation."""


@dataclass(frozen=True)
class ClockConfig:
    """System-wide clock parameters.

    Attributes:
        n: number of processes (>= 1).
        epsilon_time: skew bound in microseconds; any two physical clocks
            differ by at most this much.
        interval: epoch length in microseconds; must divide epsilon_time.
        epsilon: skew bound expressed in epochs (epsilon_time / interval).
        eps1: epsilon_time + interval, the effective "far apart" bound in
            microseconds introduced by discretization.
        eps2: epsilon_time - interval, the effective "close enough to be
            reorderable" bound in microseconds.
    """

    n: int
    epsilon_time: int
    interval: int
    epsilon: int = field(init=False)
    eps1: int = field(init=False)
    eps2: int = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ClockError(f"process count must be >= 1, got {self.n}")
        if self.interval <= 0 or self.interval > self.epsilon_time:
            raise ClockError(
                f"interval must satisfy 0 < interval <= epsilon_time "
                f"(got interval={self.interval}, epsilon_time={self.epsilon_time})"
            )
        if self.epsilon_time % self.interval != 0:
            raise ClockError(
                f"interval {self.interval} does not divide skew bound {self.epsilon_time}"
            )
        object.__setattr__(self, "epsilon", self.epsilon_time // self.interval)
        object.__setattr__(self, "eps1", self.epsilon_time + self.interval)
        object.__setattr__(self, "eps2", self.epsilon_time - self.interval)


class Ordering(enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    CONCURRENT = "concurrent"


@dataclass(frozen=True)
class Timestamp:
    """One replay-clock timestamp.

    ``offsets`` maps process id -> offset; an absent entry reads as epsilon.
    The owner's entry is always present (it may equal epsilon at the exact
    skew boundary); every other stored entry is strictly below epsilon.
    ``counters`` maps process id -> counter; absent reads as zero, and an
    entry may only exist for a process whose offset is stored.
    """

    mx: int
    offsets: Dict[int, int]
    counters: Dict[int, int]
    owner: Optional[int] = None

    def offset(self, proc: int, cfg: ClockConfig) -> int:
        """Effective offset for ``proc`` (epsilon when not stored)."""
        return self.offsets.get(proc, cfg.epsilon)

    def counter(self, proc: int) -> int:
        return self.counters.get(proc, 0)

    def knowledge(self, proc: int, cfg: ClockConfig) -> int:
        """Latest epoch of ``proc`` this timestamp is aware of."""
        return self.mx - self.offset(proc, cfg)

    def knowledge_vector(self, cfg: ClockConfig) -> list[int]:
        return [self.mx - self.offsets.get(k, cfg.epsilon) for k in range(cfg.n)]


def fresh_timestamp(owner: int) -> Timestamp:
    """Initial state of a process's clock: epoch 0, aware only of itself."""
    return Timestamp(mx=0, offsets={owner: 0}, counters={}, owner=owner)


def derive_epoch(pt: int, cfg: ClockConfig) -> int:
    """Epoch of a local physical time: floor(pt / interval)."""
    if pt < 0:
        raise ClockError(f"physical time must be non-negative, got {pt}")
    return pt // cfg.interval


def shift(ts: Timestamp, newmx: int, cfg: ClockConfig) -> Timestamp:
    """Move a timestamp forward to epoch ``newmx``, aging every offset.

    Offsets grow by the displacement and saturate at epsilon, at which point
    they are dropped from sparse storage (the synchronization assumption is
    then at least as informative).  Counters are carried unchanged; callers
    reset them as the update rules demand.
    """
    if newmx < ts.mx:
        raise ClockError(f"shift is forward-only: newmx={newmx} < mx={ts.mx}")
    delta = newmx - ts.mx
    if delta == 0:
        return ts
    eps = cfg.epsilon
    offsets = {k: v + delta for k, v in ts.offsets.items() if v + delta < eps}
    return Timestamp(mx=newmx, offsets=offsets, counters=dict(ts.counters), owner=ts.owner)


def merge_same_epoch(t1: Timestamp, t2: Timestamp, cfg: ClockConfig) -> Timestamp:
    """Combine two timestamps with equal mx by taking elementwise-min offsets.

    Absent offsets participate as epsilon.  The result carries no counters;
    the receive rule fills them in afterwards.  Owner is taken from ``t1``.
    """
    if t1.mx != t2.mx:
        raise ClockError(f"merge requires equal epochs, got {t1.mx} and {t2.mx}")
    eps = cfg.epsilon
    offsets: Dict[int, int] = {}
    for k in t1.offsets.keys() | t2.offsets.keys():
        v = min(t1.offsets.get(k, eps), t2.offsets.get(k, eps))
        if v < eps:
            offsets[k] = v
    return Timestamp(mx=t1.mx, offsets=offsets, counters={}, owner=t1.owner)


def equal_offset(t1: Timestamp, t2: Timestamp, cfg: ClockConfig) -> bool:
    """True iff both timestamps hold identical epoch knowledge.

    Requires equal mx and agreement of the full offset maps, with absent
    entries comparing as epsilon.
    """
    if t1.mx != t2.mx:
        return False
    eps = cfg.epsilon
    for k in t1.offsets.keys() | t2.offsets.keys():
        if t1.offsets.get(k, eps) != t2.offsets.get(k, eps):
            return False
    return True


def _with_self_offset(offsets: Dict[int, int], owner: int, value: int) -> Dict[int, int]:
    # The owner's entry is pinned (never evicted) so that a counter for the
    # owner always has a storage slot in the bitmap encoding.
    out = dict(offsets)
    out[owner] = value
    return out


def advance(ts: Timestamp, epoch_now: int, cfg: ClockConfig) -> Timestamp:
    """Update a process's clock for a local or send event.

    If the event lands in the same epoch with unchanged self-offset, only the
    owner's counter is bumped; otherwise the timestamp is shifted to
    max(mx, epoch_now), the self-offset is refreshed, and counters reset.
    """
    if ts.owner is None:
        raise ClockError("advance requires a timestamp with an owner")
    owner = ts.owner
    eps = cfg.epsilon
    newmx = max(ts.mx, epoch_now)
    # compare saturated values: when the local clock trails mx by more than
    # epsilon (possible only when the declared bound understates the real
    # skew), the stored self-offset is already pinned at epsilon and the
    # event still sits in the same knowledge state
    new_offset = min(newmx - epoch_now, eps)
    if ts.mx == newmx and ts.offset(owner, cfg) == new_offset:
        counters = dict(ts.counters)
        counters[owner] = counters.get(owner, 0) + 1
        offsets = _with_self_offset(ts.offsets, owner, new_offset)
        return Timestamp(mx=ts.mx, offsets=offsets, counters=counters, owner=owner)
    shifted = shift(ts, newmx, cfg)
    offsets = _with_self_offset(shifted.offsets, owner, new_offset)
    return Timestamp(mx=newmx, offsets=offsets, counters={}, owner=owner)


def receive(ts_j: Timestamp, ts_m: Timestamp, epoch_now: int, cfg: ClockConfig) -> Timestamp:
    """Update the receiver's clock ``ts_j`` with a message timestamp ``ts_m``.

    Both sides are shifted to the common epoch and merged; the receiver's own
    offset is refreshed from its physical clock.  Counters follow the four
    cases of the receive rule, keyed on whether the merged knowledge equals
    the receiver's and/or the message's prior knowledge.
    """
    if ts_j.owner is None:
        raise ClockError("receive requires a receiver timestamp with an owner")
    owner = ts_j.owner
    eps = cfg.epsilon
    newmx = max(ts_j.mx, ts_m.mx, epoch_now)
    a = shift(ts_j, newmx, cfg)
    b = shift(ts_m, newmx, cfg)
    c = merge_same_epoch(a, b, cfg)
    self_off = min(c.offset(owner, cfg), newmx - epoch_now)
    offsets = _with_self_offset(c.offsets, owner, self_off)
    c = Timestamp(mx=newmx, offsets=offsets, counters={}, owner=owner)

    j_same = equal_offset(ts_j, c, cfg)
    m_same = equal_offset(ts_m, c, cfg)
    counters: Dict[int, int] = {}
    if j_same and m_same:
        for k in ts_j.counters.keys() | ts_m.counters.keys():
            counters[k] = max(ts_j.counter(k), ts_m.counter(k))
        counters[owner] = counters.get(owner, 0) + 1
    elif j_same:
        counters = dict(ts_j.counters)
        counters[owner] = counters.get(owner, 0) + 1
    elif m_same:
        counters = dict(ts_m.counters)
        counters[owner] = counters.get(owner, 0) + 1
    # neither: counters stay cleared
    for k in counters:
        # a counter needs a storage slot even when the offset sits exactly at
        # the no-information value (only possible at the skew boundary)
        offsets.setdefault(k, eps)
    return Timestamp(mx=newmx, offsets=offsets, counters=counters, owner=owner)


def _less_than(e: Timestamp, f: Timestamp, cfg: ClockConfig) -> bool:
    """The strict order over timestamps.

    e < f iff mx.f is more than epsilon epochs ahead, or the epochs are close
    and f's knowledge vector strictly dominates e's, or knowledge is equal and
    f's counters strictly dominate e's.  Iterates only stored entries; all
    processes absent from both maps compare through mx alone.
    """
    eps = cfg.epsilon
    if f.mx > e.mx + eps:
        return True
    if abs(f.mx - e.mx) > eps:
        return False

    keys = e.offsets.keys() | f.offsets.keys()
    has_rest = len(keys) < cfg.n
    le = True
    lt = False
    equal = True
    for k in keys:
        ke = e.mx - e.offsets.get(k, eps)
        kf = f.mx - f.offsets.get(k, eps)
        if ke > kf:
            le = False
            equal = False
            break
        if ke < kf:
            lt = True
            equal = False
    if has_rest:
        # every unstored process is known at exactly mx - epsilon
        if e.mx > f.mx:
            le = False
            equal = False
        elif e.mx < f.mx:
            lt = True
            equal = False
    if le and lt:
        return True
    if not equal:
        return False

    ckeys = e.counters.keys() | f.counters.keys()
    c_le = all(e.counter(k) <= f.counter(k) for k in ckeys)
    c_lt = any(e.counter(k) < f.counter(k) for k in ckeys)
    return c_le and c_lt


def compare(e: Timestamp, f: Timestamp, cfg: ClockConfig) -> Ordering:
    """Order two timestamps produced under the same configuration.

    Identical timestamps are concurrent: the order is strict, so replay may
    schedule them either way.
    """
    if _less_than(e, f, cfg):
        return Ordering.BEFORE
    if _less_than(f, e, cfg):
        return Ordering.AFTER
    return Ordering.CONCURRENT
