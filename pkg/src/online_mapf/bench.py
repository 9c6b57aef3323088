"""Scenario generation and the batch benchmark behind the CLI.

Layout of a benchmark directory::

    maps/<map>.map
    scenarios/<map>-k<k>-<i>.scen
    runs/<map>-k<k>-<i>-<solver>.json      (per-run dumps)
    results.csv                            (one row per instance and solver)
    summary.csv                            (one row per agent count and solver)
"""

from __future__ import annotations

import csv
import io
import math
import random
from collections import defaultdict
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath

from .baselines import VARIANTS, SolverConfig
from .errors import GenerationError, UsageError
from .graph import GridMap, Heuristic, load_map
from .model import Agent, format_scenario, parse_scenario
from .sim import OnlineInstance, RunReport, run_online

SUMMARY_COLUMNS = ("k", "solver", "success_rate", "mean_time_s", "speedup_vs_A1", "expansions", "ctx_hit_rate")
RESULT_COLUMNS = (
    "instance", "map", "k", "solver", "success", "status", "time_s",
    "soc", "ll_calls", "expansions", "expansions_per_call", "ctx_hits", "ctx_lookups",
)  # fmt: skip


@dataclass(frozen=True)
class BenchSpec:
    """What to generate and how to run it.

    The map is either ``map_file`` or a generated ``width`` x ``height``
    grid with ``obstacle_ratio`` of its interior cells blocked (``maps``
    of them, each with its own layout).  Starts and goals lie on the two
    opposing sides named by ``sides``: ``"x"`` for the left and right
    columns, ``"y"`` for the top and bottom rows.
    """

    agent_counts: tuple[int, ...] = (40, 60)
    instances: int = 30
    start_range: tuple[int, int] = (1, 100)
    width: int = 32
    height: int = 32
    obstacle_ratio: float = 0.0
    maps: int = 1
    map_file: str | None = None
    sides: str = "x"
    time_limit: float = 30.0
    seed: int = 0
    solvers: tuple[str, ...] = VARIANTS

    def __post_init__(self) -> None:
        if not self.agent_counts or min(self.agent_counts) < 1:
            raise UsageError("agent counts must be positive")
        if self.instances < 1 or self.maps < 1:
            raise UsageError("instances and maps must be positive")
        lo, hi = self.start_range
        if lo < 0 or hi < lo:
            raise UsageError(f"bad start-time range {self.start_range}")
        if self.map_file is None and (self.width < 2 or self.height < 1):
            raise UsageError("generated maps need width >= 2 and height >= 1")
        if not 0.0 <= self.obstacle_ratio < 1.0:
            raise UsageError("obstacle ratio must lie in [0, 1)")
        if self.sides not in ("x", "y"):
            raise UsageError("sides must be 'x' or 'y'")
        if self.time_limit <= 0:
            raise UsageError("time limit must be positive")
        for s in self.solvers:
            if s not in VARIANTS:
                raise UsageError(f"unknown solver {s!r}")


@dataclass(frozen=True)
class ScenarioFile:
    name: str  # <map>-k<k>-<i>
    map_path: FsPath
    scen_path: FsPath
    k: int
    index: int


def _rng(seed: int, *parts: object) -> random.Random:
    # string seeds hash deterministically across processes and runs
    return random.Random(":".join(str(p) for p in (seed, *parts)))


def generate_map(spec: BenchSpec, index: int) -> tuple[str, GridMap]:
    """The ``index``-th generated map; the two designated sides stay free."""
    w, h = spec.width, spec.height
    if spec.obstacle_ratio == 0.0:
        return f"open-{w}x{h}-{index}", GridMap.open(w, h)
    rng = _rng(spec.seed, "map", index)
    blocked = []
    for y in range(h):
        for x in range(w):
            side = x in (0, w - 1) if spec.sides == "x" else y in (0, h - 1)
            blocked.append(not side and rng.random() < spec.obstacle_ratio)
    pct = round(spec.obstacle_ratio * 100)
    return f"random-{w}x{h}-{pct}-{index}", GridMap(w, h, tuple(blocked))


def _sides(grid: GridMap, sides: str) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    if sides == "x":
        a = [(0, y) for y in range(grid.height) if grid.is_free(0, y)]
        b = [(grid.width - 1, y) for y in range(grid.height) if grid.is_free(grid.width - 1, y)]
    else:
        a = [(x, 0) for x in range(grid.width) if grid.is_free(x, 0)]
        b = [(x, grid.height - 1) for x in range(grid.width) if grid.is_free(x, grid.height - 1)]
    return a, b


def sample_agents(grid: GridMap, k: int, start_range: tuple[int, int], sides: str, rng: random.Random) -> list[Agent]:
    """``k`` agents travelling between the two opposing sides of ``grid``.

    Each agent draws a start time uniformly from ``start_range`` and a
    direction; the start is a free side cell not yet taken by an agent with
    the same start time, the goal a reachable free cell on the other side.
    """
    g = grid.to_graph()
    side_a, side_b = _sides(grid, sides)
    if not side_a or not side_b:
        raise GenerationError("both designated sides need at least one free cell")
    heur = Heuristic(g, "exact")
    used: dict[int, set[tuple[int, int]]] = defaultdict(set)
    agents = []
    for i in range(k):
        t = rng.randint(*start_range)
        src, dst = (side_a, side_b) if rng.random() < 0.5 else (side_b, side_a)
        free = [c for c in src if c not in used[t]]
        if not free:
            src, dst = dst, src
            free = [c for c in src if c not in used[t]]
        if not free:
            raise GenerationError(f"no free start cell left for agents starting at t={t}")
        start = rng.choice(free)
        s = g.vertex_at(*start)
        goals = [c for c in dst if heur.reachable(s, g.vertex_at(*c))]
        if not goals:
            raise GenerationError(f"no goal on the opposite side is reachable from {start}")
        goal = rng.choice(goals)
        used[t].add(start)
        agents.append(Agent(i, t, s, g.vertex_at(*goal)))
    return agents


def gen_scenarios(spec: BenchSpec, out_dir: str | FsPath) -> list[ScenarioFile]:
    """Write maps and scenario files under ``out_dir``; same seed, same bytes."""
    out = FsPath(out_dir)
    (out / "maps").mkdir(parents=True, exist_ok=True)
    (out / "scenarios").mkdir(parents=True, exist_ok=True)
    if spec.map_file is not None:
        grid = load_map(spec.map_file)
        maps = [(FsPath(spec.map_file).stem, grid)]
    else:
        maps = [generate_map(spec, i) for i in range(spec.maps)]
    files = []
    for map_name, grid in maps:
        map_path = out / "maps" / f"{map_name}.map"
        map_path.write_text(grid.to_text())
        g = grid.to_graph()
        for k in spec.agent_counts:
            for i in range(spec.instances):
                rng = _rng(spec.seed, map_name, k, i)
                agents = sample_agents(grid, k, spec.start_range, spec.sides, rng)
                name = f"{map_name}-k{k}-{i}"
                scen_path = out / "scenarios" / f"{name}.scen"
                scen_path.write_text(format_scenario(agents, g))
                files.append(ScenarioFile(name, map_path, scen_path, k, i))
    return files


def discover(bench_dir: str | FsPath) -> list[ScenarioFile]:
    """Scenario files already present under ``bench_dir``, sorted by name."""
    root = FsPath(bench_dir)
    files = []
    for scen in sorted((root / "scenarios").glob("*.scen")):
        try:
            map_name, k_part, idx = scen.stem.rsplit("-", 2)
            k, index = int(k_part.removeprefix("k")), int(idx)
        except ValueError:
            raise UsageError(f"scenario file name {scen.name!r} is not <map>-k<k>-<i>.scen") from None
        map_path = root / "maps" / f"{map_name}.map"
        if not map_path.exists():
            raise UsageError(f"scenario {scen.name} has no map {map_path}")
        files.append(ScenarioFile(scen.stem, map_path, scen, k, index))
    return files


def load_instance(map_path: str | FsPath, scen_path: str | FsPath) -> OnlineInstance:
    g = load_map(map_path).to_graph()
    agents = parse_scenario(FsPath(scen_path).read_text(), g)
    return OnlineInstance(g, agents, FsPath(scen_path).stem)


def solve_one(map_path: str | FsPath, scen_path: str | FsPath, config: SolverConfig) -> RunReport:
    return run_online(load_instance(map_path, scen_path), config)


@dataclass
class InstanceResult:
    instance: str
    map: str
    k: int
    solver: str
    success: bool
    status: str
    time_s: float
    soc: int
    ll_calls: int
    expansions: int
    expansions_per_call: float
    ctx_hits: int
    ctx_lookups: int
    report: str = field(default="", repr=False)  # full JSON dump of the run


def _run_job(job: tuple[ScenarioFile, str, float, str, bool]) -> InstanceResult:
    scen, solver, time_limit, heuristic, keep_report = job
    config = SolverConfig(solver, heuristic, time_limit)
    rep = solve_one(scen.map_path, scen.scen_path, config)
    return InstanceResult(
        instance=scen.name,
        map=scen.map_path.stem,
        k=scen.k,
        solver=solver,
        success=rep.success,
        status=rep.status,
        # failures count at the limit
        time_s=rep.total_time_s if rep.success else time_limit,
        soc=rep.soc,
        ll_calls=rep.ll_calls,
        expansions=rep.ll_expansions,
        expansions_per_call=rep.expansions_per_call,
        ctx_hits=rep.ctx_hits,
        ctx_lookups=rep.ctx_lookups,
        report=rep.dumps() if keep_report else "",
    )


@dataclass
class SummaryRow:
    k: int
    solver: str
    success_rate: float
    mean_time_s: float
    speedup_vs_A1: float | None
    expansions: float
    ctx_hit_rate: float
    mean_soc: float
    instances: int

    @property
    def cell(self) -> str:
        """Table cell such as ``12.4(1.37)``; the A1 row shows ``(-)``."""
        x = self.mean_time_s
        t = f"{round(x, 2):g}" if x >= 0.1 else f"{x:.2g}"
        if self.speedup_vs_A1 is None or self.solver == "A1":
            return f"{t}(-)"
        return f"{t}({self.speedup_vs_A1:.2f})"


def summarize(results: Sequence[InstanceResult]) -> list[SummaryRow]:
    groups: dict[tuple[int, str], list[InstanceResult]] = defaultdict(list)
    for r in results:
        groups[(r.k, r.solver)].append(r)
    mean_time = {key: sum(r.time_s for r in rs) / len(rs) for key, rs in groups.items()}
    rows = []
    for (k, solver), rs in sorted(groups.items()):
        base = mean_time.get((k, "a1"))
        mine = mean_time[(k, solver)]
        lookups = sum(r.ctx_lookups for r in rs)
        rows.append(
            SummaryRow(
                k=k,
                solver=solver.upper(),
                success_rate=sum(r.success for r in rs) / len(rs),
                mean_time_s=mine,
                speedup_vs_A1=None if base is None or mine == 0 else base / mine,
                expansions=sum(r.expansions for r in rs) / len(rs),
                ctx_hit_rate=sum(r.ctx_hits for r in rs) / lookups if lookups else 0.0,
                mean_soc=sum(r.soc for r in rs) / len(rs),
                instances=len(rs),
            )
        )
    return rows


def _fmt(x: object) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def summary_csv(rows: Iterable[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((*SUMMARY_COLUMNS, "mean_soc", "instances", "cell"))
    for r in rows:
        vals = [getattr(r, c) for c in SUMMARY_COLUMNS]
        w.writerow([_fmt(v) for v in (*vals, r.mean_soc, r.instances, r.cell)])
    return buf.getvalue()


def results_csv(results: Iterable[InstanceResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in results:
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in RESULT_COLUMNS])
    return buf.getvalue()


@dataclass
class BenchResult:
    results: list[InstanceResult]
    summary: list[SummaryRow]

    def by_instance(self, solver: str) -> dict[str, InstanceResult]:
        return {r.instance: r for r in self.results if r.solver == solver}


def geometric_mean(xs: Sequence[float]) -> float:
    if not xs:
        return math.nan
    return math.exp(sum(math.log(x) for x in xs) / len(xs))


def run_bench(
    scenarios: Sequence[ScenarioFile],
    solvers: Sequence[str] = VARIANTS,
    time_limit: float = 30.0,
    out_dir: str | FsPath | None = None,
    workers: int = 1,
    heuristic: str = "manhattan",
) -> BenchResult:
    """Run every solver on every scenario and aggregate per (k, solver).

    With ``workers > 1`` runs go to a process pool; results are merged in
    (instance, solver) order so reports do not depend on scheduling.  When
    ``out_dir`` is given the CSV reports and per-run JSON dumps are written
    there.
    """
    for s in solvers:
        if s not in VARIANTS:
            raise UsageError(f"unknown solver {s!r}")
    keep = out_dir is not None
    jobs = [(scen, s, time_limit, heuristic, keep) for scen in scenarios for s in solvers]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    results.sort(key=lambda r: (r.instance, VARIANTS.index(r.solver)))
    summary = summarize(results)
    if out_dir is not None:
        out = FsPath(out_dir)
        (out / "runs").mkdir(parents=True, exist_ok=True)
        for r in results:
            (out / "runs" / f"{r.instance}-{r.solver}.json").write_text(r.report + "\n")
        (out / "results.csv").write_text(results_csv(results))
        (out / "summary.csv").write_text(summary_csv(summary))
    return BenchResult(results, summary)
