"""Command-line entry point.

Subcommands: simulate, replay, enumerate, validate, sweep, feasibility,
partial-replay, serve.  The skew bound is taken in milliseconds and interval
and delay in microseconds; everything is converted to microseconds
internally.  All randomness is controlled by --seed, so identical
invocations produce identical outputs.

Exit codes: 0 success, 1 validation error (bad flags, bad config, or a
failed validation), 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

from . import analysis, replay as replay_mod
from .clock import ClockConfig
from .fixtures import FIXTURE_NAMES, fixture_path, letter
from .sim import ConfigError, SimConfig, Trace, read_trace, run, write_trace


class CliValidationError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise CliValidationError(message)


def _ms_to_us(value_ms: float, flag: str) -> int:
    us = value_ms * 1000.0
    if abs(us - round(us)) > 1e-9:
        raise CliValidationError(f"{flag} must be a whole number of microseconds")
    return int(round(us))


def _resolve_trace(path: str) -> str:
    if path.startswith("fixture:"):
        name = path.split(":", 1)[1]
        if name not in FIXTURE_NAMES:
            raise CliValidationError(
                f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}"
            )
        return fixture_path(name)
    return path


def _load_trace(path: str) -> Trace:
    return read_trace(_resolve_trace(path))


def _format_ids(ids: Sequence[int], letters: bool) -> str:
    if letters:
        return " ".join(letter(i) for i in ids)
    return " ".join(str(i) for i in ids)


def _build_parser() -> _Parser:
    parser = _Parser(prog="replayclock", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the simulator and write a trace")
    p.add_argument("--n", type=int, required=True, help="number of processes")
    p.add_argument("--epsilon-ms", type=float, required=True, help="clock skew bound (ms)")
    p.add_argument("--interval-us", type=int, required=True, help="epoch interval (us)")
    p.add_argument("--alpha", type=float, required=True, help="per-process send rate (messages/s)")
    p.add_argument("--delta-us", type=int, required=True, help="minimum message delay (us)")
    p.add_argument("--duration-ms", type=float, required=True, help="simulated real time (ms)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--jitter-us", type=int, default=0, help="extra uniform delay bound (us)")
    p.add_argument("--stall-prob", type=float, default=0.1, help="per-us clock stall probability")
    p.add_argument("--out", required=True, help="trace file to write (jsonl)")

    p = sub.add_parser("replay", help="print one random replay of a trace")
    p.add_argument("--trace", required=True, help="trace file, or fixture:eps5 / fixture:eps20")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--out", help="also write the ordering to this file")
    p.add_argument("--letters", action="store_true", help="print ids 0..25 as letters A..Z")

    p = sub.add_parser("enumerate", help="print every permissible replay ordering")
    p.add_argument("--trace", required=True)
    p.add_argument("--limit", type=int, default=replay_mod.DEFAULT_ENUMERATION_GUARD,
                   help="refuse traces with more events than this")
    p.add_argument("--letters", action="store_true")

    p = sub.add_parser("validate", help="check an ordering against a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--order", required=True, help="file with one event id per line")

    p = sub.add_parser("sweep", help="run a parameter sweep from a JSON spec")
    p.add_argument("--spec", required=True, help="sweep spec file (JSON)")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--plot-out", help="also emit plot data (jsonl)")
    p.add_argument("--plot-x", default="epsilon_time", help="x-axis column for plot data")
    p.add_argument("--plot-series", default="alpha", help="series column for plot data")
    p.add_argument("--plot-y", default="tau_mean", help="y-axis column for plot data")

    p = sub.add_parser("feasibility", help="classify (alpha, delta) cells by an offset budget")
    p.add_argument("--spec", required=True, help="sweep spec file (JSON)")
    p.add_argument("--tau-budget", type=float, required=True, help="max permissible mean offsets")
    p.add_argument("--out", help="CSV output path for the region table")

    p = sub.add_parser("partial-replay", help="restamp a trace under a smaller skew bound")
    p.add_argument("--trace", required=True)
    p.add_argument("--epsilon-ms", type=float, required=True, help="declared skew bound (ms)")
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("serve", help="serve traces and replay sessions over HTTP")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--trace-dir", required=True, help="directory of .jsonl traces")
    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = SimConfig(
        clock=ClockConfig(
            n=args.n,
            epsilon_time=_ms_to_us(args.epsilon_ms, "--epsilon-ms"),
            interval=args.interval_us,
        ),
        alpha=args.alpha,
        delta=args.delta_us,
        duration=_ms_to_us(args.duration_ms, "--duration-ms"),
        seed=args.seed,
        jitter=args.jitter_us,
        stall_prob=args.stall_prob,
    )
    trace = run(config)
    write_trace(trace, args.out)
    m = trace.metrics
    print(f"wrote {len(trace.events)} events to {args.out}")
    print(
        f"tau_mean={m.tau_mean:.4f} sigma_mean={m.sigma_mean:.4f} "
        f"counter_event_fraction={m.counter_event_fraction:.4f} "
        f"max_observed_skew={m.max_observed_skew}us "
        f"mean_clock_words={m.mean_clock_words:.4f}"
    )
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    trace = _load_trace(args.trace)
    ordering = replay_mod.replay_random(trace, args.seed)
    print(_format_ids(ordering, args.letters))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"trace": args.trace, "seed": args.seed}) + "\n")
            for eid in ordering:
                fh.write(f"{eid}\n")
    return 0


def _cmd_enumerate(args: argparse.Namespace) -> int:
    trace = _load_trace(args.trace)
    orderings = replay_mod.enumerate_replays(trace, limit=args.limit)
    for ordering in sorted(orderings):
        print(_format_ids(ordering, args.letters))
    return 0


def _read_order_file(path: str) -> List[int]:
    ids: List[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                continue  # header line from `replay --out`
            ids.extend(int(tok) for tok in line.split())
    return ids


def _cmd_validate(args: argparse.Namespace) -> int:
    trace = _load_trace(args.trace)
    ordering = _read_order_file(args.order)
    ok, violation = replay_mod.validate_order(ordering, trace)
    if ok:
        print(f"valid: {len(ordering)} events respect the replay order")
        return 0
    first, second = violation
    print(f"invalid: event {first} must be replayed before event {second}", file=sys.stderr)
    return 1


def _load_spec(path: str) -> analysis.SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return analysis.SweepSpec(
        grid=raw.get("grid", {}),
        fixed=raw.get("fixed", {}),
        repeats=raw.get("repeats", 1),
        seed_base=raw.get("seed_base", 0),
    )


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    result = analysis.sweep(spec)
    for err in result.errors:
        print(f"cell failed: {err}", file=sys.stderr)
    if not result.rows:
        raise CliValidationError("sweep produced no rows")
    analysis.emit_csv(result.rows, args.out)
    print(f"wrote {len(result.rows)} rows to {args.out}")
    if args.plot_out:
        analysis.emit_plot_data(
            result.rows, args.plot_x, args.plot_series, args.plot_out, y_axis=args.plot_y
        )
        print(f"wrote plot data to {args.plot_out}")
    return 0


def _cmd_feasibility(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    region = analysis.feasibility(spec, args.tau_budget)
    rows = [
        {
            "alpha": a,
            "delta": d,
            "tau_mean": region.tau_means[(a, d)],
            "classification": region.cells[(a, d)],
            "frontier": (a, d) in set(region.boundary),
        }
        for (a, d) in sorted(region.cells)
    ]
    if args.out:
        analysis.emit_csv(rows, args.out)
    feasible = sum(1 for r in rows if r["classification"] == "feasible")
    print(
        f"tau budget {args.tau_budget}: {feasible}/{len(rows)} cells feasible; "
        f"frontier cells: {region.boundary}"
    )
    for r in rows:
        print(
            f"alpha={r['alpha']} delta={r['delta']} tau={r['tau_mean']:.3f} "
            f"{r['classification']}"
        )
    return 0


def _cmd_partial_replay(args: argparse.Namespace) -> int:
    trace = _load_trace(args.trace)
    declared = _ms_to_us(args.epsilon_ms, "--epsilon-ms")
    report = analysis.partial_replay_report(trace, declared)
    if args.json:
        print(json.dumps(report.__dict__, sort_keys=True))
        return 0
    print(f"declared skew bound: {report.declared_eps_time}us (trace: {report.actual_eps_time}us)")
    print(f"causality violations: {report.requirement1_violations}")
    print(f"far-apart ordering violations: {report.requirement2_violations}")
    print(
        f"forced orders: {report.forced_order_count} of {report.concurrent_pairs} "
        f"concurrent pairs ({report.forced_order_fraction:.4%})"
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.trace_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "replay": _cmd_replay,
    "enumerate": _cmd_enumerate,
    "validate": _cmd_validate,
    "sweep": _cmd_sweep,
    "feasibility": _cmd_feasibility,
    "partial-replay": _cmd_partial_replay,
    "serve": _cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, analysis.AnalysisError, replay_mod.ReplayError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
