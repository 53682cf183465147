"""Command-line entry point: ``mndsolve <command> [options]``.

Exit codes: 0 when every solve converged, 2 when some did not, 1 on usage
or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import batch
from .continuous import format_trace, run_example_trace
from .cutting_plane import SolverConfig, solve_mnd
from .instance_io import InstanceFormatError, dumps_instance, read_instance
from .kkt import NoCounterexample, demonstrate_failure
from .knapsack import DEFAULT_GAMMA, KnapsackGame, generate_instance, verify_gne

EXIT_OK, EXIT_USAGE, EXIT_UNCONVERGED = 0, 1, 2


def _parse_pairs(text: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for item in text.split(","):
        try:
            j, l = item.lower().split("x")
            pairs.append((int(j), int(l)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad pair {item!r}; expected e.g. 3x4,5x6") from None
    return tuple(pairs)


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", type=Path, help="instance JSON file (overrides the generator flags)")
    p.add_argument("--players", type=int, default=2)
    p.add_argument("--markets", type=int, default=2)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--gamma", type=int, default=DEFAULT_GAMMA)


def _load(args):
    if args.instance is not None:
        return read_instance(args.instance)
    return generate_instance(args.seed, args.players, args.markets, args.gamma)


def _write(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_generate(args) -> int:
    _write(dumps_instance(_load(args)), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args)
    trace_fh = None
    if args.trace:
        trace_fh = sys.stdout if args.trace == "-" else open(args.trace, "w")
    try:
        report = solve_mnd(
            KnapsackGame(inst),
            config=SolverConfig(args.epsilon, args.max_iters),
            on_iteration=(lambda rec: print(rec.to_json(), file=trace_fh, flush=True)) if trace_fh else None,
        )
    finally:
        if trace_fh not in (None, sys.stdout):
            trace_fh.close()
    summary = report.summary()
    summary["y"] = [int(v) for v in report.y]
    summary["verified_gne"] = bool(verify_gne(inst, report.y, tol=args.epsilon)) if report.status.converged else None
    _write(json.dumps(summary, indent=2) + "\n", args.out)
    return EXIT_OK if report.status.converged else EXIT_UNCONVERGED


def cmd_batch(args) -> int:
    pairs = args.pairs
    if pairs is None:
        if args.players is not None or args.markets is not None:
            pairs = ((args.players or 3, args.markets or 4),)
        else:
            pairs = batch.DESK_PAIRS + (batch.FULL_PAIRS if args.full_scale else ())
    cfg = batch.BatchConfig(
        pairs=pairs, instances=args.instances, base_seed=args.seed, epsilon=args.epsilon,
        gamma=args.gamma, out_dir=args.out, workers=args.workers, max_iterations=args.max_iters,
        timings=not args.no_timings,
    )

    def progress(row):
        logging.info("%s seed %d: %s in %d iterations", row.pair, row.seed, row.status, row.iterations)

    result = batch.run_batch(cfg, progress=progress)
    if args.out is None:
        sys.stdout.write(batch.rows_to_csv(result.rows, cfg.timings))
    print(json.dumps(result.summary, indent=2, sort_keys=True), file=sys.stderr)
    return EXIT_OK if result.all_converged else EXIT_UNCONVERGED


def cmd_trace_example(args) -> int:
    report = run_example_trace(SolverConfig(args.epsilon, args.max_iters), r=args.r, resolution=args.resolution)
    seed = report.final_cuts[0] if report.final_cuts else (float("nan"), float("nan"))
    _write(format_trace(report, seed) + "\n", args.out)
    return EXIT_OK if report.status.converged else EXIT_UNCONVERGED


def cmd_kkt_demo(args) -> int:
    inst = _load(args)
    try:
        witness = demonstrate_failure(inst)
    except NoCounterexample as exc:
        _write(json.dumps({"counterexample": None, "reason": str(exc)}, indent=2) + "\n", args.out)
        return EXIT_OK
    payload = {
        "counterexample": [int(v) for v in witness.y],
        "disequilibrium": witness.disequilibrium,
        "regrets": witness.regrets.tolist(),
        "certificate": witness.certificate.to_dict(),
    }
    _write(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mndsolve", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random knapsack game instance as JSON")
    _instance_args(p)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run the cutting-plane method on one instance")
    _instance_args(p)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--trace", help="write per-iteration JSON lines here ('-' for stdout)")
    p.add_argument("--out", help="report file (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("batch", help="solve many random instances and write CSV/JSON/histograms")
    p.add_argument("--pairs", type=_parse_pairs, help="comma-separated PLAYERSxMARKETS list, e.g. 3x4,5x6")
    p.add_argument("--players", type=int)
    p.add_argument("--markets", type=int)
    p.add_argument("--full-scale", action="store_true", help="also run the 5/25/50 x 10/20 pairs")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="base seed; instance k uses seed + k")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--gamma", type=int, default=DEFAULT_GAMMA)
    p.add_argument("--out", type=Path, help="output directory (default: CSV to stdout)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--no-timings", action="store_true", help="leave timing columns empty (byte-reproducible CSV)")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("trace-example", help="replay the two-player power-constraint example")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--resolution", type=int, default=1024)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace_example)

    p = sub.add_parser("kkt-demo", help="show a KKT point of the relaxed game that is not an equilibrium")
    _instance_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kkt_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InstanceFormatError, OSError, ValueError) as exc:
        print(f"mndsolve: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
