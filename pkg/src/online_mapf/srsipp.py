"""Backward safe-interval search with reusable OPEN/CLOSED lists.

The search runs from the goal toward the agent over *time-interval-space*
states ``([t_l, t_r], v)``: every time point in the interval shares one
cost-to-goal ``g``.  Because the goal never changes for an agent, the
OPEN and CLOSED lists of one search remain valid for the next search with
the same constraint set; only the heuristic (which points at the agent's
current vertex) has to be refreshed.

Two details differ from a textbook safe-interval search:

* Popping an interval only closes its prefix ``[t_l, max(t_l, t_c + h_v)]``,
  the points whose own f equals the interval's f.  Later points have a
  larger f and go back to OPEN.  This keeps every closed interval exact at
  every time point it covers, which is what makes CLOSED reusable after the
  agent has moved.
* Edge constraints are applied when a dummy son is generated, by cutting
  the forbidden departure times out of it.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right
from collections.abc import Callable
from dataclasses import dataclass, field
from operator import attrgetter

from .errors import InvariantError, UsageError
from .graph import Graph, Heuristic
from .model import INF_TIME, Agent, ConstraintSet, Path, dec

OPEN, CLOSED, DISCARDED = 0, 1, 2
_STATUS = {OPEN: "open", CLOSED: "closed", DISCARDED: "discarded"}

_t_l = attrgetter("t_l")


class TISState:
    """``([t_l, t_r], vertex)`` with cost-to-goal ``g`` and a back reference.

    ``parent`` is the closed state whose dummy son last improved ``g``;
    every time point ``t`` here can step to ``parent`` at ``t + 1``.
    """

    __slots__ = ("vertex", "t_l", "t_r", "g", "h", "f", "parent", "status", "stamp")

    def __init__(self, vertex: int, t_l: int, t_r: int, g: int, parent: TISState | None = None):
        self.vertex = vertex
        self.t_l = t_l
        self.t_r = t_r
        self.g = g
        self.h = 0
        self.f = INF_TIME
        self.parent = parent
        self.status = OPEN
        self.stamp = -1

    @property
    def closed(self) -> bool:
        return self.status == CLOSED

    def covers(self, t: int) -> bool:
        return self.t_l <= t <= self.t_r

    def interval(self) -> tuple[int, int]:
        return (self.t_l, self.t_r)

    def __repr__(self) -> str:
        hi = "inf" if self.t_r >= INF_TIME else self.t_r
        g = "inf" if self.g >= INF_TIME else self.g
        return f"TIS([{self.t_l},{hi}], v={self.vertex}, g={g}, {_STATUS[self.status]})"


@dataclass
class SearchContext:
    """OPEN, CLOSED and the per-vertex interval registry of one (agent, constraints) pair.

    ``open`` holds the open states with a finite ``g``; open states still at
    ``g = inf`` live only in ``intervals`` until a dummy son reaches them.
    """

    intervals: dict[int, list[TISState]] = field(default_factory=dict)
    open: set[TISState] = field(default_factory=set)
    heap: list[tuple] = field(default_factory=list)
    owner: tuple | None = None
    searches: int = 0
    expansions: int = 0
    _stamp: int = 0

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def states(self) -> list[TISState]:
        return [s for v in sorted(self.intervals) for s in self.intervals[v]]

    def closed_states(self) -> list[TISState]:
        return [s for s in self.states() if s.status == CLOSED]

    def resident_states(self) -> int:
        return sum(len(lst) for lst in self.intervals.values())

    def push(self, s: TISState) -> None:
        self._stamp += 1
        s.stamp = self._stamp
        heapq.heappush(self.heap, (s.f, -s.g, s.t_l, s.vertex, self._stamp, s))

    def dump(self) -> str:
        """Line-oriented interval table: vertex, interval, g/h/f and status."""
        lines = []
        for s in self.states():
            hi = "inf" if s.t_r >= INF_TIME else str(s.t_r)
            g = "inf" if s.g >= INF_TIME else str(s.g)
            f = "inf" if s.f >= INF_TIME else str(s.f)
            lines.append(f"v={s.vertex} [{s.t_l},{hi}] g={g} h={s.h} f={f} {_STATUS[s.status]}")
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class SearchResult:
    path: Path | None
    context: SearchContext
    expansions: int
    terminal: TISState | None = None
    cost: int | None = None


# -- building blocks ---------------------------------------------------------------------


def build_safe_intervals(v: int, cons: ConstraintSet, t_s: int, goal: int | None = None) -> list[TISState]:
    """Maximal intervals of ``[t_s, inf)`` at ``v`` that avoid every vertex-constrained time.

    States on ``goal`` start with ``g = 0``; all others with ``g = inf``.
    """
    g0 = 0 if v == goal else INF_TIME
    times = cons.vertex_times.get(v)
    if not times:
        return [TISState(v, t_s, INF_TIME, g0)]
    out = []
    lo = t_s
    for t in times:
        if t < lo:
            continue
        if t > lo:
            out.append(TISState(v, lo, t - 1, g0))
        lo = t + 1
    out.append(TISState(v, lo, INF_TIME, g0))
    return out


def dummy_son(
    s: TISState, v_prime: int, t_s: int, cons: ConstraintSet | None = None
) -> list[tuple[int, int]]:
    """Departure intervals at ``v_prime`` from which one action reaches ``s``.

    The raw interval is ``[max(t_s, t_l - 1), t_r - 1]``; departure times
    whose move ``v_prime -> s.vertex`` is edge-constrained are cut out, so
    the result may hold several pieces or none.  Each piece costs
    ``s.g + 1``.
    """
    lo = max(t_s, s.t_l - 1)
    hi = dec(s.t_r)
    if hi < lo:
        return []
    if cons is None or v_prime == s.vertex:
        return [(lo, hi)]
    banned = cons.edge_times.get((v_prime, s.vertex))
    if not banned:
        return [(lo, hi)]
    pieces = []
    for arrive in banned:
        d = arrive - 1
        if d < lo or d > hi:
            continue
        if d > lo:
            pieces.append((lo, d - 1))
        lo = d + 1
    if lo <= hi:
        pieces.append((lo, hi))
    return pieces


def h_tis(t_l: int, t_r: int, h_vertex: int, t_c: int, t_s: int = 0) -> int:
    """``max(max(t_l - t_c, 0), h_v(v))``; undefined for intervals ending before ``t_s``."""
    if t_r < t_s:
        raise InvariantError(f"heuristic requested for interval [{t_l},{t_r}] before t_s={t_s}")
    return max(t_l - t_c, 0, h_vertex)


def improve_intervals(
    states: list[TISState],
    lo: int,
    hi: int,
    cost: int,
    parent: TISState | None,
    on_new: Callable[[TISState], None] | None = None,
) -> list[TISState]:
    """Lower ``g`` to ``cost`` on every open state of one vertex where ``[lo, hi]`` covers it.

    ``states`` is the vertex's interval list sorted by ``t_l`` and is edited
    in place.  A partially covered state is split at the coverage
    boundaries and only the covered fragment takes the new ``g`` and
    ``parent``.  Closed and discarded states are never touched.  Returns the
    improved states; ``on_new`` receives every state created or changed.
    """
    improved = []
    i = max(bisect_right(states, lo, key=_t_l) - 1, 0)
    while i < len(states):
        s = states[i]
        if s.t_l > hi:
            break
        if s.t_r < lo or s.status != OPEN or s.g <= cost:
            i += 1
            continue
        a = max(lo, s.t_l)
        b = min(hi, s.t_r)
        if s.t_l < a:
            left = TISState(s.vertex, s.t_l, a - 1, s.g, s.parent)
            states.insert(i, left)
            i += 1
            if on_new is not None:
                on_new(left)
        if b < s.t_r:
            right = TISState(s.vertex, b + 1, s.t_r, s.g, s.parent)
            states.insert(i + 1, right)
            if on_new is not None:
                on_new(right)
        s.t_l, s.t_r, s.g, s.parent = a, b, cost, parent
        if on_new is not None:
            on_new(s)
        improved.append(s)
        i += 1
    return improved


def stop_check(
    cts: list[TISState], f_min: int, in_scene: bool, t_c: int
) -> tuple[bool, TISState | None]:
    """Decide whether the search may stop and pick the terminal state.

    An agent in the scene needs a candidate covering ``t_c``.  A garage
    agent may enter at any ``t >= t_c``; the best candidate costs
    ``max(t_l - t_c, 0) + g`` and is final once no open state has a
    smaller f.
    """
    if not cts:
        return False, None
    if in_scene:
        for s in cts:
            if s.t_l <= t_c <= s.t_r:
                return True, s
        return False, None
    best = min(cts, key=lambda s: (max(s.t_l - t_c, 0) + s.g, s.t_l, s.vertex))
    c_min = max(best.t_l - t_c, 0) + best.g
    if c_min <= f_min:
        return True, best
    return False, None


def terminal_cost(s: TISState, t_c: int) -> int:
    return max(s.t_l - t_c, 0) + s.g


def build_path(terminal: TISState, agent: Agent, t_c: int) -> Path:
    """Walk the back references from ``terminal`` to a goal interval.

    A garage agent enters at ``max(t_l, t_c)``.  Consecutive states on the
    chain are one time step apart by construction; waits show up as
    repeated vertices.
    """
    t = max(terminal.t_l, t_c)
    if not terminal.covers(t):
        raise InvariantError(f"terminal {terminal} does not cover entry time {t}")
    vertices = [terminal.vertex]
    cur = terminal
    while cur.parent is not None:
        cur = cur.parent
        t += 1
        if not cur.covers(t):
            raise InvariantError(f"broken back reference: {cur} does not cover {t}")
        vertices.append(cur.vertex)
    if cur.vertex != agent.goal or cur.g != 0:
        raise InvariantError(f"back-reference chain ends at {cur}, not at the goal")
    if len(vertices) - 1 != terminal.g:
        raise InvariantError(f"path length {len(vertices) - 1} disagrees with g={terminal.g}")
    return Path(max(terminal.t_l, t_c), tuple(vertices))


def earliest_entry(start: int, cons: ConstraintSet, t_c: int) -> int:
    """First time ``>= t_c`` at which ``start`` is not vertex-constrained."""
    t = t_c
    blocked = cons.vertex_set
    while (start, t) in blocked:
        t += 1
    return t


def cost_upper_bound(n_vertices: int, cons: ConstraintSet, t_c: int) -> int:
    """No optimal plan arrives later than ``max(t_c, last constraint + 1) + |V|``."""
    return max(t_c, cons.max_time + 1) + n_vertices - t_c


# -- the search ----------------------------------------------------------------------------


def _ensure(ctx: SearchContext, v: int, cons: ConstraintSet, t_s: int, goal: int) -> list[TISState]:
    lst = ctx.intervals.get(v)
    if lst is None:
        lst = build_safe_intervals(v, cons, t_s, goal)
        ctx.intervals[v] = lst
        if v == goal:
            for s in lst:
                ctx.open.add(s)
    return lst


def srsipp_search(
    graph: Graph,
    agent: Agent,
    cons: ConstraintSet,
    t_c: int,
    ctx: SearchContext | None = None,
    heuristic: Heuristic | None = None,
    *,
    stop_early: bool = True,
    check_deadline: Callable[[], None] | None = None,
) -> SearchResult:
    """Plan ``agent`` from its current state to its goal, reusing ``ctx``.

    ``ctx`` must have been used only with this agent and this exact
    constraint set (or be empty).  It is mutated and returned.  The path
    minimises ``arrival - t_c``.  With ``stop_early=False`` the search
    keeps expanding until no open state can beat the cost bound and then
    returns the terminal chosen at the first stop point; the context then
    holds every candidate, which is how the stopping rule is audited.
    """
    if ctx is None:
        ctx = SearchContext()
    if heuristic is None:
        heuristic = Heuristic(graph)
    owner = (agent.id, agent.goal, agent.start_time, cons.key)
    if ctx.owner is None:
        ctx.owner = owner
    elif ctx.owner != owner:
        raise UsageError("search context belongs to a different agent or constraint set")
    if t_c < agent.start_time:
        raise UsageError(f"agent {agent.id} has not started at t_c={t_c}")
    ctx.searches += 1

    in_scene = agent.in_scene
    v_c = agent.current if in_scene else agent.start
    assert v_c is not None
    goal, t_s = agent.goal, agent.start_time
    if in_scene and cons.blocks_vertex(v_c, t_c):
        return SearchResult(None, ctx, 0)
    if not heuristic.reachable(v_c, goal):
        return SearchResult(None, ctx, 0)

    hv = heuristic.from_source(v_c)
    bound = cost_upper_bound(graph.n, cons, t_c)
    t0 = t_c if in_scene else earliest_entry(v_c, cons, t_c)

    # refresh h/f of everything in OPEN against the new current state
    heap = []
    for s in list(ctx.open):
        if s.t_r < t0 + hv[s.vertex]:
            s.status = DISCARDED
            ctx.open.discard(s)
            continue
        if s.g < INF_TIME:
            s.h = max(s.t_l - t_c, 0, hv[s.vertex])
            s.f = s.g + s.h
            ctx._stamp += 1
            s.stamp = ctx._stamp
            heap.append((s.f, -s.g, s.t_l, s.vertex, s.stamp, s))
    heapq.heapify(heap)
    ctx.heap = heap
    if goal not in ctx.intervals:
        for s in _ensure(ctx, goal, cons, t_s, goal):
            if s.t_r < t0 + hv[goal]:
                s.status = DISCARDED
                ctx.open.discard(s)
                continue
            s.h = max(s.t_l - t_c, 0, hv[goal])
            s.f = s.h
            ctx.push(s)

    cts = [s for s in ctx.intervals.get(v_c, ()) if s.status == CLOSED and s.t_r >= t_c]

    def f_min() -> int:
        while heap:
            top = heap[0]
            s = top[5]
            if s.stamp != top[4] or s.status != OPEN:
                heapq.heappop(heap)
                continue
            return top[0] if top[0] <= bound else INF_TIME
        return INF_TIME

    stop, terminal = stop_check(cts, f_min(), in_scene, t_c)
    expansions = 0
    first: TISState | None = None
    if stop:
        if stop_early:
            path = build_path(terminal, agent, t_c)
            return SearchResult(path, ctx, 0, terminal, path.cost(t_c))
        first = terminal

    pred = graph.pred
    edge_times = cons.edge_times
    intervals = ctx.intervals
    open_set = ctx.open

    def touch(s: TISState) -> None:
        # fragments still at g = inf stay out of OPEN until improved
        g = s.g
        if g >= INF_TIME:
            return
        v = s.vertex
        if s.t_r < t0 + hv[v]:
            s.status = DISCARDED
            open_set.discard(s)
            return
        open_set.add(s)
        s.h = h = max(s.t_l - t_c, 0, hv[v])
        s.f = f = g + h
        ctx._stamp += 1
        s.stamp = ctx._stamp
        heapq.heappush(heap, (f, -g, s.t_l, v, s.stamp, s))

    while heap:
        f, _, _, _, stamp, s = heapq.heappop(heap)
        if s.stamp != stamp or s.status != OPEN:
            continue
        if f > bound:
            heapq.heappush(heap, (f, -s.g, s.t_l, s.vertex, stamp, s))
            break
        if s.t_r < t0 + hv[s.vertex]:
            s.status = DISCARDED
            open_set.discard(s)
            continue
        v = s.vertex
        lst = intervals[v]
        reach = t0 + hv[v]
        if s.t_l < reach:
            # too early for the agent to be here, now and in every later search
            dead = TISState(v, s.t_l, reach - 1, s.g, s.parent)
            dead.status = DISCARDED
            lst.insert(lst.index(s), dead)
            s.t_l = reach
        cut = max(s.t_l, t_c + hv[v])
        if cut < s.t_r:
            rest = TISState(v, cut + 1, s.t_r, s.g, s.parent)
            lst.insert(lst.index(s) + 1, rest)
            s.t_r = cut
            touch(rest)
        s.status = CLOSED
        open_set.discard(s)
        expansions += 1
        if check_deadline is not None and not expansions & 255:
            check_deadline()

        # dummy sons; the common case without edge constraints is inlined
        cost = s.g + 1
        lo = max(t_s, s.t_l - 1)
        hi = dec(s.t_r)
        if hi >= lo:
            for vp in pred[v] + (v,):
                if vp == goal or hi < t0 + hv[vp]:
                    continue  # goal holds g = 0; or the son is unreachable
                lst = intervals.get(vp)
                if lst is None:
                    # g = inf states join the heap only once improved
                    lst = intervals[vp] = build_safe_intervals(vp, cons, t_s, goal)
                if vp != v and (vp, v) in edge_times:
                    for a, b in dummy_son(s, vp, t_s, cons):
                        improve_intervals(lst, a, b, cost, s, touch)
                else:
                    improve_intervals(lst, lo, hi, cost, s, touch)

        if v == v_c and s.t_r >= t_c:
            cts.append(s)
        if first is None and cts:
            stop, terminal = stop_check(cts, f_min(), in_scene, t_c)
            if stop:
                if stop_early:
                    ctx.expansions += expansions
                    path = build_path(terminal, agent, t_c)
                    return SearchResult(path, ctx, expansions, terminal, path.cost(t_c))
                first = terminal

    ctx.expansions += expansions
    if first is None:
        stop, terminal = stop_check(cts, INF_TIME, in_scene, t_c)
        first = terminal if stop else None
    if first is None:
        return SearchResult(None, ctx, expansions)
    path = build_path(first, agent, t_c)
    return SearchResult(path, ctx, expansions, first, path.cost(t_c))


def candidate_costs(ctx: SearchContext, agent: Agent, t_c: int) -> list[int]:
    """Total cost of every closed terminal candidate at the agent's current vertex."""
    v_c = agent.current if agent.in_scene else agent.start
    out = []
    for s in ctx.intervals.get(v_c, ()):
        if s.status != CLOSED or s.t_r < t_c:
            continue
        if agent.in_scene:
            if s.covers(t_c):
                out.append(s.g)
        else:
            out.append(terminal_cost(s, t_c))
    return out
