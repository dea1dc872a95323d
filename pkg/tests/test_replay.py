import copy
import itertools

import pytest

from replayclock.clock import ClockConfig
from replayclock.fixtures import worked_example
from replayclock.replay import (
    NotAPermutation,
    NotInFrontline,
    TooLarge,
    enumerate_replays,
    frontline,
    replay_random,
    session_auto_step,
    session_new,
    session_reset,
    session_step,
    validate_order,
)
from replayclock.sim import SimConfig, run

# worked example ids: A=0, B=1, C=2, D=3
A, B, C, D = 0, 1, 2, 3

EPS5 = worked_example(5)
EPS20 = worked_example(20)


def stamps_of(trace):
    return {ev.event_id: ev.repcl for ev in trace.events}


def small_sim_trace(seed, n=4, events_cap=10):
    cfg = ClockConfig(n=n, epsilon_time=64, interval=8)
    trace = run(SimConfig(clock=cfg, alpha=3000.0, delta=4, duration=4000, seed=seed))
    clipped = trace.events[:events_cap]
    # drop recvs whose send got clipped away
    sends = {ev.msg_id for ev in clipped if ev.kind == "send"}
    kept = [ev for ev in clipped if ev.kind != "recv" or ev.msg_id in sends]
    return type(trace)(config=trace.config, events=kept, metrics=trace.metrics)


class TestFrontline:
    def test_tight_bound_single_start(self):
        assert frontline(stamps_of(EPS5), EPS5.config.clock) == {C}

    def test_loose_bound_two_starts(self):
        assert frontline(stamps_of(EPS20), EPS20.config.clock) == {A, C}

    def test_empty(self):
        assert frontline({}, EPS5.config.clock) == set()

    def test_monotone_under_removal(self):
        for seed in range(8):
            trace = small_sim_trace(seed)
            stamps = stamps_of(trace)
            cfg = trace.config.clock
            fl = frontline(stamps, cfg)
            for eid in fl:
                rest = {k: v for k, v in stamps.items() if k != eid}
                assert fl - {eid} <= frontline(rest, cfg)


class TestReplayRandom:
    def test_unique_ordering_any_seed(self):
        for seed in range(10):
            assert replay_random(EPS5, seed) == [C, A, B, D]

    def test_single_event(self):
        single = type(EPS5)(config=EPS5.config, events=EPS5.events[:1], metrics=EPS5.metrics)
        assert replay_random(single, 3) == [EPS5.events[0].event_id]

    def test_loose_bound_covers_all_three(self):
        seen = set()
        allowed = {(C, A, B, D), (A, B, C, D), (A, C, B, D)}
        for seed in range(200):
            out = tuple(replay_random(EPS20, seed))
            assert out in allowed
            seen.add(out)
        assert seen == allowed

    def test_outputs_always_validate(self):
        for seed in range(6):
            trace = small_sim_trace(seed, events_cap=40)
            ordering = replay_random(trace, seed * 7)
            ok, violation = validate_order(ordering, trace)
            assert ok, violation


class TestEnumerate:
    def test_tight_bound(self):
        assert enumerate_replays(EPS5) == {(C, A, B, D)}

    def test_loose_bound(self):
        assert enumerate_replays(EPS20) == {(C, A, B, D), (A, B, C, D), (A, C, B, D)}

    def test_two_concurrent_events(self):
        two = type(EPS20)(config=EPS20.config, events=EPS20.events[:2], metrics=EPS20.metrics)
        ids = [ev.event_id for ev in two.events]
        assert enumerate_replays(two) == {tuple(ids), tuple(reversed(ids))}

    def test_guard(self):
        trace = small_sim_trace(0, events_cap=14)
        if len(trace.events) > 12:
            with pytest.raises(TooLarge):
                enumerate_replays(trace)
            enumerate_replays(trace, limit=len(trace.events))  # override works


class TestValidateOrder:
    def test_valid_ordering(self):
        assert validate_order([C, A, B, D], EPS5) == (True, None)

    def test_causality_violation_reported(self):
        ok, violation = validate_order([C, B, A, D], EPS5)
        assert not ok and violation == (A, B)

    def test_reversed_chain_invalid(self):
        ordering = replay_random(EPS5, 0)
        ok, violation = validate_order(list(reversed(ordering)), EPS5)
        assert not ok and violation is not None

    def test_not_a_permutation(self):
        with pytest.raises(NotAPermutation):
            validate_order([A, B, C], EPS5)
        with pytest.raises(NotAPermutation):
            validate_order([A, A, B, C], EPS5)


class TestSessions:
    def test_step_updates_frontline(self):
        session = session_new(EPS20, seed=1)
        session_step(session, A)
        assert session.chosen_prefix == [A]
        assert session.frontline == {B, C}
        assert len(session.remaining) == 3

    def test_step_outside_frontline(self):
        session = session_new(EPS20, seed=1)
        with pytest.raises(NotInFrontline) as err:
            session_step(session, D)
        assert err.value.event_id == D
        assert err.value.frontline == {A, C}

    def test_reset_restores_and_rearms_seed(self):
        session = session_new(EPS20, seed=9)
        first = []
        while not session.done:
            first.append(session_auto_step(session))
        session_reset(session)
        assert session.chosen_prefix == [] and session.frontline == {A, C}
        second = []
        while not session.done:
            second.append(session_auto_step(session))
        assert second == first

    def test_auto_matches_replay_random(self):
        for seed in (0, 5, 123):
            session = session_new(EPS20, seed=seed)
            while not session.done:
                session_auto_step(session)
            assert session.chosen_prefix == replay_random(EPS20, seed)

    def test_auto_step_when_done(self):
        session = session_new(EPS5, seed=0)
        while not session.done:
            session_auto_step(session)
        assert session_auto_step(session) is None


def reachable_session_orderings(trace):
    """Every complete ordering reachable through interactive step choices."""
    out = set()

    def walk(session, prefix):
        if session.done:
            out.add(tuple(prefix))
            return
        for eid in sorted(session.frontline):
            fork = copy.deepcopy(session)
            session_step(fork, eid)
            walk(fork, prefix + [eid])

    walk(session_new(trace, seed=0), [])
    return out


class TestCompleteness:
    def test_fixture_reachability_equals_enumeration(self):
        assert reachable_session_orderings(EPS5) == enumerate_replays(EPS5)
        assert reachable_session_orderings(EPS20) == enumerate_replays(EPS20)

    def test_small_traces_reachability_equals_enumeration(self):
        for seed in range(10):
            trace = small_sim_trace(seed)
            assert len(trace.events) <= 10
            reached = reachable_session_orderings(trace)
            extensions = enumerate_replays(trace, limit=10)
            assert reached == extensions


class TestReplayRequirements:
    def test_far_apart_events_keep_their_order(self):
        # events whose known-physical-time gap exceeds the discretization
        # slack must appear in that order in every replay
        cfg = ClockConfig(n=4, epsilon_time=64, interval=8)
        trace = run(SimConfig(clock=cfg, alpha=500.0, delta=4, duration=30_000, seed=2))
        mpt = {ev.event_id: ev.oracle_mpt for ev in trace.events}
        bound = cfg.eps1
        for seed in (0, 1):
            ordering = replay_random(trace, seed)
            position = {eid: i for i, eid in enumerate(ordering)}
            for e, f in itertools.combinations(trace.events, 2):
                if mpt[f.event_id] - mpt[e.event_id] > bound:
                    assert position[e.event_id] < position[f.event_id]

    def test_close_concurrent_pairs_reachable_both_ways(self):
        # B and C in the loose-bound worked example can be steered either way
        def steer(first, second):
            session = session_new(EPS20, seed=0)
            while not session.done:
                fl = session.frontline
                if first in fl:
                    session_step(session, first)
                    first = second
                    second = None
                elif second is not None:
                    choice = sorted(fl - {second})[0]
                    session_step(session, choice)
                else:
                    session_step(session, sorted(fl)[0])
            return session.chosen_prefix

        bc = steer(B, C)
        cb = steer(C, B)
        assert bc.index(B) < bc.index(C)
        assert cb.index(C) < cb.index(B)
