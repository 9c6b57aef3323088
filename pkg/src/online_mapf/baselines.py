"""Solver variants A1-A4 and their single-agent planners.

All four variants share the conflict-tree search in :mod:`.scbs`; they
differ only in the low-level planner object handed to it:

========  ===========================================  =====================
variant   low level                                    context reuse
========  ===========================================  =====================
``a1``    forward A* over (time, vertex) states        none
``a2``    backward interval search, fresh every call   none
``a3``    backward interval search                     previous path suffix
``a4``    backward interval search                     OPEN/CLOSED per key
========  ===========================================  =====================
"""

from __future__ import annotations

import heapq
import time
from collections.abc import Callable
from dataclasses import dataclass

from .context import PlanningContext
from .errors import SolverTimeout, UsageError
from .graph import Graph, Heuristic
from .model import Agent, ConstraintSet, Path
from .srsipp import SearchContext, cost_upper_bound, srsipp_search

VARIANTS = ("a1", "a2", "a3", "a4")
LABELS = {
    "a1": "RA+CBS+A*",
    "a2": "RA+CBS+RSIPP",
    "a3": "SR+SCBS+RSIPP",
    "a4": "SR+SCBS+SRSIPP",
}


@dataclass(frozen=True)
class SolverConfig:
    variant: str = "a4"
    heuristic: str = "manhattan"
    time_limit: float = 30.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise UsageError(f"unknown solver variant {self.variant!r}; pick one of {VARIANTS}")
        if self.heuristic not in ("manhattan", "exact"):
            raise UsageError(f"unknown heuristic {self.heuristic!r}")
        if self.time_limit <= 0:
            raise UsageError("time limit must be positive")

    @property
    def label(self) -> str:
        return LABELS[self.variant]


class Deadline:
    """Wall-clock budget; :meth:`check` raises :class:`SolverTimeout` once spent."""

    def __init__(self, seconds: float | None) -> None:
        self.seconds = seconds
        self.start = time.perf_counter()
        self.end = None if seconds is None else self.start + seconds

    def check(self) -> None:
        if self.end is not None and time.perf_counter() > self.end:
            raise SolverTimeout(f"time limit of {self.seconds}s exceeded")

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start


def astar_ts(
    graph: Graph,
    agent: Agent,
    cons: ConstraintSet,
    t_c: int,
    heuristic: Heuristic | None = None,
    check_deadline: Callable[[], None] | None = None,
) -> tuple[Path | None, int]:
    """Forward A* over time-space states; returns ``(path, expansions)``.

    A garage agent starts in a virtual garage vertex from which it can
    wait or enter its start vertex at the next step (or enter at ``t_c``).
    Cost is ``arrival - t_c``.
    """
    if heuristic is None:
        heuristic = Heuristic(graph)
    goal, start = agent.goal, agent.start
    if not heuristic.reachable(agent.current if agent.in_scene else start, goal):
        return None, 0
    hg = heuristic.to_target(goal)
    vset, eset = cons.vertex_set, cons.edge_set
    bound = cost_upper_bound(graph.n, cons, t_c)
    n = graph.n
    garage = n  # virtual vertex id
    succ = graph.succ
    stride = n + 1

    heap: list[tuple[int, int, int, int]] = []
    parent: dict[int, int] = {}

    def push(t: int, v: int, from_key: int) -> None:
        key = t * stride + v
        if key in parent:
            return
        parent[key] = from_key
        hv = hg[start] if v == garage else hg[v]
        g = t - t_c
        if g + hv <= bound:
            heapq.heappush(heap, (g + hv, -g, v, t))

    if agent.in_scene:
        if (agent.current, t_c) in vset:
            return None, 0
        push(t_c, agent.current, -1)  # type: ignore[arg-type]
    else:
        push(t_c, garage, -1)
        if (start, t_c) not in vset:
            push(t_c, start, -1)

    closed: set[int] = set()
    expansions = 0
    while heap:
        _, _, v, t = heapq.heappop(heap)
        key = t * stride + v
        if key in closed:
            continue
        if v == goal:
            vertices = []
            while key != -1:
                vv = key % stride
                if vv != garage:
                    vertices.append(vv)
                key = parent[key]
            vertices.reverse()
            return Path(t - len(vertices) + 1, tuple(vertices)), expansions
        closed.add(key)
        expansions += 1
        if check_deadline is not None and not expansions & 255:
            check_deadline()
        t1 = t + 1
        if v == garage:
            push(t1, garage, key)
            if (start, t1) not in vset:
                push(t1, start, key)
            continue
        for w in succ[v] + (v,):
            if (w, t1) in vset or (v, w, t1) in eset:
                continue
            push(t1, w, key)
    return None, expansions


def rsipp(
    graph: Graph,
    agent: Agent,
    cons: ConstraintSet,
    t_c: int,
    heuristic: Heuristic | None = None,
    check_deadline: Callable[[], None] | None = None,
) -> tuple[Path | None, int]:
    """Backward interval search on a fresh context; nothing is kept."""
    res = srsipp_search(graph, agent, cons, t_c, SearchContext(), heuristic, check_deadline=check_deadline)
    return res.path, res.expansions


def a3_reuse_shortcut(previous: Path | None, agent: Agent, t_c: int) -> Path | None:
    """Suffix of ``previous`` from ``t_c`` if the agent is still on it, else None.

    ``previous`` must be the optimal path last found for this agent under
    the same constraint set; a suffix of an optimal path is optimal from
    any state on it.  A garage agent is on the path while its entry time
    has not passed.
    """
    if previous is None:
        return None
    if agent.in_scene:
        if previous.start_time <= t_c and previous.at(t_c) == agent.current:
            return previous.suffix(t_c)
        return None
    if previous.start_time >= t_c and previous.vertices[0] == agent.start:
        return previous
    return None


# -- low-level planner objects used by the conflict tree -----------------------------------


class LowLevel:
    """Single-agent planner plus bookkeeping shared by all variants."""

    variant = ""

    def __init__(self, graph: Graph, heuristic: Heuristic, deadline: Deadline | None = None) -> None:
        self.graph = graph
        self.heuristic = heuristic
        self.deadline = deadline
        self.calls = 0
        self.expansions = 0
        self.pc: PlanningContext | None = None

    @property
    def _check(self) -> Callable[[], None] | None:
        return self.deadline.check if self.deadline is not None else None

    def plan(self, agent: Agent, cons: ConstraintSet, t_c: int) -> Path | None:
        raise NotImplementedError

    def purge(self, agent_id: int) -> None:
        if self.pc is not None:
            self.pc.purge_agent(agent_id)

    def counters(self) -> dict[str, int]:
        return {
            "calls": self.calls,
            "expansions": self.expansions,
            "ctx_hits": self.pc.hits if self.pc is not None else 0,
            "ctx_misses": self.pc.misses if self.pc is not None else 0,
        }


class AStarLowLevel(LowLevel):
    variant = "a1"

    def plan(self, agent: Agent, cons: ConstraintSet, t_c: int) -> Path | None:
        self.calls += 1
        path, exp = astar_ts(self.graph, agent, cons, t_c, self.heuristic, self._check)
        self.expansions += exp
        return path


class RSIPPLowLevel(LowLevel):
    variant = "a2"

    def plan(self, agent: Agent, cons: ConstraintSet, t_c: int) -> Path | None:
        self.calls += 1
        path, exp = rsipp(self.graph, agent, cons, t_c, self.heuristic, self._check)
        self.expansions += exp
        return path


class ShortcutLowLevel(LowLevel):
    """A3: keep the last path per (agent, constraints); replan only when the agent left it."""

    variant = "a3"

    def __init__(self, graph: Graph, heuristic: Heuristic, deadline: Deadline | None = None) -> None:
        super().__init__(graph, heuristic, deadline)
        self.pc = PlanningContext(factory=lambda: None)
        self.shortcuts = 0

    def plan(self, agent: Agent, cons: ConstraintSet, t_c: int) -> Path | None:
        assert self.pc is not None
        self.calls += 1
        previous = self.pc.get_ipc(agent.id, cons)
        path = a3_reuse_shortcut(previous, agent, t_c)
        if path is not None:
            self.shortcuts += 1
        else:
            path, exp = rsipp(self.graph, agent, cons, t_c, self.heuristic, self._check)
            self.expansions += exp
        self.pc.put_ipc(agent.id, cons, path)
        return path


class SustainableLowLevel(LowLevel):
    """A4: OPEN/CLOSED of every (agent, constraints) pair survive across calls."""

    variant = "a4"

    def __init__(self, graph: Graph, heuristic: Heuristic, deadline: Deadline | None = None) -> None:
        super().__init__(graph, heuristic, deadline)
        self.pc = PlanningContext()

    def plan(self, agent: Agent, cons: ConstraintSet, t_c: int) -> Path | None:
        assert self.pc is not None
        self.calls += 1
        ipc = self.pc.get_ipc(agent.id, cons)
        try:
            res = srsipp_search(self.graph, agent, cons, t_c, ipc, self.heuristic, check_deadline=self._check)
        finally:
            self.pc.put_ipc(agent.id, cons, ipc)
        self.expansions += res.expansions
        return res.path


_LOW_LEVELS: dict[str, type[LowLevel]] = {
    "a1": AStarLowLevel,
    "a2": RSIPPLowLevel,
    "a3": ShortcutLowLevel,
    "a4": SustainableLowLevel,
}


def make_low_level(
    variant: str, graph: Graph, heuristic: Heuristic | str = "manhattan", deadline: Deadline | None = None
) -> LowLevel:
    if isinstance(heuristic, str):
        heuristic = Heuristic(graph, heuristic)
    try:
        cls = _LOW_LEVELS[variant]
    except KeyError:
        raise UsageError(f"unknown solver variant {variant!r}") from None
    return cls(graph, heuristic, deadline)
