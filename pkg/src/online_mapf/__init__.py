"""Online multi-agent path finding with reusable backward interval search."""

from .baselines import LABELS, VARIANTS, SolverConfig, astar_ts, make_low_level, rsipp
from .bench import BenchSpec, gen_scenarios, run_bench, solve_one
from .context import PlanningContext
from .errors import GenerationError, InvariantError, MapParseError, MapfError, SolverTimeout, Unsolvable, UsageError
from .graph import Graph, GridMap, Heuristic, load_map, parse_map
from .model import Agent, Constraint, ConstraintSet, ExecutePlan, Path, find_earliest_conflict, soc
from .scbs import scbs_solve
from .sim import OnlineInstance, RunReport, run_online, sr_step
from .srsipp import SearchContext, srsipp_search

__version__ = "0.1.0"

__all__ = [
    "LABELS",
    "VARIANTS",
    "Agent",
    "BenchSpec",
    "Constraint",
    "ConstraintSet",
    "ExecutePlan",
    "GenerationError",
    "Graph",
    "GridMap",
    "Heuristic",
    "InvariantError",
    "MapParseError",
    "MapfError",
    "OnlineInstance",
    "Path",
    "PlanningContext",
    "RunReport",
    "SearchContext",
    "SolverConfig",
    "SolverTimeout",
    "Unsolvable",
    "UsageError",
    "astar_ts",
    "find_earliest_conflict",
    "gen_scenarios",
    "load_map",
    "make_low_level",
    "parse_map",
    "rsipp",
    "run_bench",
    "run_online",
    "scbs_solve",
    "soc",
    "solve_one",
    "sr_step",
    "srsipp_search",
]
