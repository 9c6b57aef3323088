"""Command line: ``gen`` scenarios, ``solve`` one instance, ``bench`` a batch.

Exit status: 0 success, 1 no solution (unsolvable instance or impossible
generation request), 2 usage error, 3 timeout, 4 unreadable or malformed
input or output file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path as FsPath

from .baselines import VARIANTS, SolverConfig
from .bench import BenchSpec, discover, gen_scenarios, run_bench, solve_one, summary_csv
from .errors import GenerationError, MapParseError, UsageError

EXIT_OK, EXIT_UNSOLVABLE, EXIT_USAGE, EXIT_TIMEOUT, EXIT_IO = 0, 1, 2, 3, 4

log = logging.getLogger("online_mapf")


def _counts(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None


def _add_gen_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", help="map file to use instead of a generated grid")
    p.add_argument("--size", type=_size, default=(32, 32), help="generated grid size WxH (default 32x32)")
    p.add_argument("--obstacles", type=float, default=0.0, help="blocked fraction of interior cells")
    p.add_argument("--maps", type=int, default=1, help="number of generated maps")
    p.add_argument("--agents", type=_counts, default=(40, 60), help="agent counts, e.g. 40,60")
    p.add_argument("--instances", type=int, default=30, help="instances per map and agent count")
    p.add_argument("--start-range", type=int, nargs=2, default=(1, 100), metavar=("LO", "HI"))
    p.add_argument("--sides", choices=("x", "y"), default="x", help="left/right (x) or top/bottom (y)")
    p.add_argument("--seed", type=int, default=0)


def _spec(args: argparse.Namespace, solvers: Sequence[str] = VARIANTS, time_limit: float = 30.0) -> BenchSpec:
    w, h = args.size
    return BenchSpec(
        agent_counts=args.agents,
        instances=args.instances,
        start_range=tuple(args.start_range),
        width=w,
        height=h,
        obstacle_ratio=args.obstacles,
        maps=args.maps,
        map_file=args.map,
        sides=args.sides,
        time_limit=time_limit,
        seed=args.seed,
        solvers=tuple(solvers),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="online-mapf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write maps and scenario files")
    _add_gen_args(gen)
    gen.add_argument("--out", required=True, help="benchmark directory")

    solve = sub.add_parser("solve", help="run one solver on one instance, print the run as JSON")
    solve.add_argument("--map", required=True)
    solve.add_argument("--scen", required=True)
    solve.add_argument("--solver", choices=VARIANTS, default="a4")
    solve.add_argument("--time-limit", type=float, default=30.0)
    solve.add_argument("--heuristic", choices=("manhattan", "exact"), default="manhattan")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--out", help="write the JSON here instead of standard output")
    solve.add_argument("--plan-dump", help="also write the per-iteration plan dump here")

    bench = sub.add_parser("bench", help="generate (or reuse) scenarios and run the solvers")
    _add_gen_args(bench)
    bench.add_argument("--scen-dir", help="run the scenarios already in this directory instead")
    bench.add_argument("--solver", action="append", choices=VARIANTS, help="repeatable; default all")
    bench.add_argument("--time-limit", type=float, default=30.0)
    bench.add_argument("--heuristic", choices=("manhattan", "exact"), default="manhattan")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--out", required=True, help="directory for reports")
    return parser


def _cmd_gen(args: argparse.Namespace) -> int:
    files = gen_scenarios(_spec(args), args.out)
    print(f"wrote {len(files)} scenario files to {FsPath(args.out) / 'scenarios'}")
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    config = SolverConfig(args.solver, args.heuristic, args.time_limit, args.seed)
    report = solve_one(args.map, args.scen, config)
    text = report.dumps() + "\n"
    if args.out:
        FsPath(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.plan_dump:
        FsPath(args.plan_dump).write_text(report.plan_dump())
    return {"success": EXIT_OK, "unsolvable": EXIT_UNSOLVABLE, "timeout": EXIT_TIMEOUT}[report.status]


def _cmd_bench(args: argparse.Namespace) -> int:
    solvers = args.solver or list(VARIANTS)
    if args.scen_dir:
        files = discover(args.scen_dir)
    else:
        files = gen_scenarios(_spec(args, solvers, args.time_limit), args.out)
    if not files:
        raise UsageError("no scenarios to run")
    log.info("running %d scenarios x %d solvers", len(files), len(solvers))
    result = run_bench(files, solvers, args.time_limit, args.out, args.workers, args.heuristic)
    sys.stdout.write(summary_csv(result.summary))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"gen": _cmd_gen, "solve": _cmd_solve, "bench": _cmd_bench}[args.command]
    try:
        return handler(args)
    except MapParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
