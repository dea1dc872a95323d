import json

import pytest

from replayclock.clock import ClockConfig
from replayclock.fixtures import worked_example
from replayclock.sim import (
    ConfigError,
    EmptyTrace,
    SimConfig,
    TraceFormatError,
    compute_metrics,
    read_trace,
    run,
    write_trace,
)

SMALL = SimConfig(
    clock=ClockConfig(n=4, epsilon_time=64, interval=8),
    alpha=800.0,
    delta=4,
    duration=60_000,
    seed=11,
)


@pytest.fixture(scope="module")
def small_trace():
    return run(SMALL)


def causal_past(events):
    """Brute-force happened-before closure: event index -> set of ancestor
    indices (including itself).  Independent of vector clocks."""
    sends = {}
    last_on_proc = {}
    past = []
    for i, ev in enumerate(events):
        anc = {i}
        if ev.proc in last_on_proc:
            anc |= past[last_on_proc[ev.proc]]
        if ev.kind == "recv":
            anc |= past[sends[ev.msg_id]]
        past.append(anc)
        last_on_proc[ev.proc] = i
        if ev.kind == "send":
            sends[ev.msg_id] = i
    return past


class TestConfigValidation:
    def test_negative_alpha(self):
        with pytest.raises(ConfigError):
            SimConfig(clock=SMALL.clock, alpha=-1, delta=1, duration=10, seed=0)

    def test_alpha_above_one_per_round(self):
        with pytest.raises(ConfigError):
            SimConfig(clock=SMALL.clock, alpha=2e6, delta=1, duration=10, seed=0)

    def test_delta_minimum(self):
        with pytest.raises(ConfigError):
            SimConfig(clock=SMALL.clock, alpha=1, delta=0, duration=10, seed=0)

    def test_duration_positive(self):
        with pytest.raises(ConfigError):
            SimConfig(clock=SMALL.clock, alpha=1, delta=1, duration=0, seed=0)

    def test_single_process_cannot_send(self):
        clock = ClockConfig(n=1, epsilon_time=8, interval=8)
        with pytest.raises(ConfigError):
            SimConfig(clock=clock, alpha=10.0, delta=1, duration=10, seed=0)


class TestRun:
    def test_single_silent_process(self):
        clock = ClockConfig(n=1, epsilon_time=8, interval=8)
        trace = run(SimConfig(clock=clock, alpha=0.0, delta=1, duration=1000, seed=1))
        assert trace.events == []
        assert trace.metrics.max_observed_skew == 0

    def test_deterministic_per_seed(self, small_trace):
        again = run(SMALL)
        assert again.events == small_trace.events
        assert again.metrics == small_trace.metrics

    def test_seed_changes_trace(self, small_trace):
        other = run(
            SimConfig(clock=SMALL.clock, alpha=SMALL.alpha, delta=SMALL.delta,
                      duration=SMALL.duration, seed=SMALL.seed + 1)
        )
        assert other.events != small_trace.events

    def test_event_invariants(self, small_trace):
        events = small_trace.events
        assert len(events) > 100
        assert [ev.event_id for ev in events] == list(range(len(events)))
        assert all(e.real_time <= f.real_time for e, f in zip(events, events[1:]))
        sends = {}
        for ev in events:
            assert ev.kind in ("send", "recv")
            if ev.kind == "send":
                sends[ev.msg_id] = ev
        for ev in events:
            if ev.kind == "recv":
                assert ev.msg_id in sends
                assert ev.real_time >= sends[ev.msg_id].real_time + SMALL.delta

    def test_skew_bound_holds(self, small_trace):
        assert small_trace.metrics.max_observed_skew <= SMALL.clock.epsilon_time
        by_round = {}
        for ev in small_trace.events:
            by_round.setdefault(ev.real_time, {})[ev.proc] = ev.pt
        for pts in by_round.values():
            if len(pts) > 1:
                assert max(pts.values()) - min(pts.values()) <= SMALL.clock.epsilon_time

    def test_local_clocks_monotone(self, small_trace):
        seen = {}
        for ev in small_trace.events:
            if ev.proc in seen:
                assert ev.pt >= seen[ev.proc]
            seen[ev.proc] = ev.pt

    def test_vector_clock_matches_happened_before(self, small_trace):
        events = small_trace.events[:200]
        past = causal_past(events)
        for i, e in enumerate(events):
            for j, f in enumerate(events):
                if i == j:
                    continue
                hb = i in past[j]
                vc_lt = all(a <= b for a, b in zip(e.oracle_vc, f.oracle_vc)) and any(
                    a < b for a, b in zip(e.oracle_vc, f.oracle_vc)
                )
                assert hb == vc_lt, (i, j)

    def test_mpt_is_max_physical_time_in_past(self, small_trace):
        events = small_trace.events[:200]
        past = causal_past(events)
        for j, ev in enumerate(events):
            assert ev.oracle_mpt == max(events[i].pt for i in past[j])

    def test_mx_is_epoch_of_mpt(self, small_trace):
        interval = SMALL.clock.interval
        for ev in small_trace.events:
            assert ev.repcl.mx == ev.oracle_mpt // interval

    def test_lower_alpha_stores_fewer_offsets(self):
        base = dict(clock=ClockConfig(n=8, epsilon_time=256, interval=8),
                    delta=8, duration=300_000)
        slow = run(SimConfig(alpha=100.0, seed=5, **base))
        fast = run(SimConfig(alpha=1600.0, seed=5, **base))
        assert slow.metrics.tau_mean < fast.metrics.tau_mean


class TestMetrics:
    def test_empty_rejected(self):
        with pytest.raises(EmptyTrace):
            compute_metrics([], SMALL.clock)

    def test_worked_example_tau(self):
        trace = worked_example(5)
        taus = [len(ev.repcl.offsets) for ev in trace.events]
        assert sorted(taus) == [1, 1, 2, 2]
        assert trace.metrics.tau_mean == pytest.approx(1.5)

    def test_single_event_tau(self, small_trace):
        m = compute_metrics(small_trace.events[:1], SMALL.clock)
        assert m.tau_mean == len(small_trace.events[0].repcl.offsets)

    def test_counter_fraction_small(self, small_trace):
        # events sharing an epoch are rare at these rates
        assert small_trace.metrics.counter_event_fraction < 0.2

    def test_mean_clock_words_floor(self, small_trace):
        assert small_trace.metrics.mean_clock_words >= 2.0


class TestTraceFile:
    def test_roundtrip(self, small_trace, tmp_path):
        path = tmp_path / "t.jsonl"
        write_trace(small_trace, str(path))
        back = read_trace(str(path))
        assert back.config == small_trace.config
        assert back.events == small_trace.events
        assert back.metrics == small_trace.metrics

    def test_rewrite_is_byte_stable(self, small_trace, tmp_path):
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_trace(small_trace, str(p1))
        write_trace(read_trace(str(p1)), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_shape(self, small_trace, tmp_path):
        path = tmp_path / "t.jsonl"
        write_trace(small_trace, str(path))
        header = json.loads(path.read_text().splitlines()[0])
        assert header["schema_version"] == 1
        assert header["sim_config"]["clock"]["n"] == SMALL.clock.n

    def test_event_line_fields(self, small_trace, tmp_path):
        path = tmp_path / "t.jsonl"
        write_trace(small_trace, str(path))
        line = json.loads(path.read_text().splitlines()[1])
        assert set(line) == {
            "event_id", "proc", "kind", "pt", "real_time", "msg_id",
            "repcl", "repcl_words", "oracle_vc", "oracle_mpt",
        }
        assert set(line["repcl"]) == {"mx", "offsets", "counters"}
        assert all(w.startswith("0x") for w in line["repcl_words"])

    def test_truncated_file(self, small_trace, tmp_path):
        path = tmp_path / "t.jsonl"
        write_trace(small_trace, str(path))
        text = path.read_text().splitlines()
        clipped = tmp_path / "clipped.jsonl"
        clipped.write_text("\n".join(text[:3])[:-10] + "\n")
        with pytest.raises(TraceFormatError):
            read_trace(str(clipped))

    def test_schema_version_mismatch(self, small_trace, tmp_path):
        path = tmp_path / "t.jsonl"
        write_trace(small_trace, str(path))
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        header["schema_version"] = 99
        bad = tmp_path / "bad.jsonl"
        bad.write_text("\n".join([json.dumps(header)] + lines[1:]) + "\n")
        with pytest.raises(TraceFormatError):
            read_trace(str(bad))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(TraceFormatError):
            read_trace(str(path))

    def test_bundled_fixtures_match_builder(self):
        from replayclock.fixtures import fixture_path, fixture_trace

        for name in ("eps5", "eps20"):
            bundled = read_trace(fixture_path(name))
            built = fixture_trace(name)
            assert bundled.events == built.events
            assert bundled.config == built.config
