"""Bundled worked example: three processes, two messages, four events.

Process 0 sends from local time 50 (event A, id 0), process 1 receives it at
local time 48 (event B, id 1), process 2 sends from local time 40 (event C,
id 2), and process 1 receives that at local time 52 (event D, id 3).  With an
epoch skew bound of 5 the only permissible replay is C A B D; with a bound of
20, B and C become reorderable against A and each other's message, giving
C A B D, A B C D and A C B D.

Event ids 0..3 correspond to the letters A..D; the CLI's --letters flag
prints them that way.
"""

from __future__ import annotations

from dataclasses import replace
from importlib import resources

from .clock import ClockConfig, advance, fresh_timestamp, receive
from .sim import EventRecord, SimConfig, Trace, compute_metrics

FIXTURE_NAMES = ("eps5", "eps20")


def worked_example(epsilon_time: int = 5) -> Trace:
    """The four-event example trace, stamped by the real clock operations."""
    cfg = ClockConfig(n=3, epsilon_time=epsilon_time, interval=1)
    config = SimConfig(clock=cfg, alpha=0.0, delta=1, duration=64, seed=0)

    a_ts = advance(fresh_timestamp(0), 50, cfg)
    c_ts = advance(fresh_timestamp(2), 40, cfg)
    b_ts = receive(fresh_timestamp(1), a_ts, 48, cfg)
    d_ts = receive(b_ts, c_ts, 52, cfg)

    a = EventRecord(0, 0, "send", 50, 10, a_ts, (1, 0, 0), 50, msg_id=0)
    b = EventRecord(1, 1, "recv", 48, 11, b_ts, (1, 1, 0), 50, msg_id=0)
    c = EventRecord(2, 2, "send", 40, 0, c_ts, (0, 0, 1), 40, msg_id=1)
    d = EventRecord(3, 1, "recv", 52, 15, d_ts, (1, 2, 1), 52, msg_id=1)

    events = [c, a, b, d]  # ordered by real_time
    metrics = replace(compute_metrics(events, cfg), max_observed_skew=0)
    return Trace(config=config, events=events, metrics=metrics)


def fixture_trace(name: str) -> Trace:
    if name == "eps5":
        return worked_example(5)
    if name == "eps20":
        return worked_example(20)
    raise ValueError(f"unknown fixture {name!r}; expected one of {FIXTURE_NAMES}")


def fixture_path(name: str) -> str:
    """Filesystem path of a bundled fixture trace file."""
    if name not in FIXTURE_NAMES:
        raise ValueError(f"unknown fixture {name!r}; expected one of {FIXTURE_NAMES}")
    return str(resources.files("replayclock").joinpath(f"data/fixture_{name}.jsonl"))


def letter(event_id: int) -> str:
    """Readable label for small event ids (0 -> A, 1 -> B, ...)."""
    if 0 <= event_id < 26:
        return chr(ord("A") + event_id)
    return str(event_id)
