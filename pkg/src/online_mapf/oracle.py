"""Brute-force references used by the test-suite.

Nothing here shares code with the solvers beyond the data model: the
single-agent oracles sweep the explicit time-expanded graph and the joint
oracle runs Dijkstra over complete multi-agent configurations.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable, Sequence

from .errors import UsageError
from .graph import UNREACHABLE, Graph, exact_h
from .model import Agent, ConstraintSet

GARAGE = -1
DONE = -2


def required_horizon(g: Graph, cons: ConstraintSet, t_c: int) -> int:
    return max(t_c, cons.max_time + 1) + g.n


def oracle_time_expanded(
    g: Graph, agent: Agent, cons: ConstraintSet, t_c: int, horizon: int | None = None
) -> int | None:
    """Optimal ``arrival - t_c`` by a forward sweep over time layers, or None.

    ``horizon`` is an absolute time; it must reach
    ``max(t_c, last constraint + 1) + |V|`` so every optimal plan fits.
    Garage agents may enter their start vertex at any layer.
    """
    need = required_horizon(g, cons, t_c)
    if horizon is None:
        horizon = need
    elif horizon < need:
        raise UsageError(f"horizon {horizon} below the required {need}")
    vset, eset = cons.vertex_set, cons.edge_set
    goal = agent.goal
    reach: set[int] = set()
    if agent.in_scene:
        if (agent.current, t_c) not in vset:
            reach.add(agent.current)  # type: ignore[arg-type]
    for t in range(t_c, horizon + 1):
        if not agent.in_scene and (agent.start, t) not in vset:
            reach.add(agent.start)
        if goal in reach:
            return t - t_c
        nxt = set()
        for u in reach:
            for w in g.succ[u] + (u,):
                if (w, t + 1) in vset or (u, w, t + 1) in eset:
                    continue
                nxt.add(w)
        reach = nxt
    return None


def oracle_backward_distances(
    g: Graph, goal: int, cons: ConstraintSet, t_from: int, t_to: int
) -> dict[tuple[int, int], int]:
    """Cost-to-goal of every time-space state ``(t, v)`` with ``t_from <= t <= t_to``.

    Constrained states map to :data:`UNREACHABLE`.  Past the last
    constraint the answer is the plain graph distance, so the table is
    filled by dynamic programming backward from there.
    """
    static = exact_h(g, goal)
    vset, eset = cons.vertex_set, cons.edge_set
    top = max(t_to, cons.max_time + 1)
    layer = list(static)
    table: dict[tuple[int, int], int] = {}
    for t in range(top, t_from - 1, -1):
        if t < top:
            nxt = layer
            layer = []
            for v in range(g.n):
                if (v, t) in vset:
                    layer.append(UNREACHABLE)
                elif v == goal:
                    layer.append(0)
                else:
                    best = UNREACHABLE
                    for w in g.succ[v] + (v,):
                        if (v, w, t + 1) in eset:
                            continue
                        if nxt[w] + 1 < best:
                            best = nxt[w] + 1
                    layer.append(best if best < UNREACHABLE else UNREACHABLE)
        if t <= t_to:
            for v in range(g.n):
                table[(t, v)] = layer[v]
    return table


def oracle_joint_bfs(
    g: Graph,
    agents: Sequence[Agent],
    t_c: int,
    reserved: Iterable[int] = (),
    horizon: int = 12,
) -> int | None:
    """Minimal sum of ``arrival - t_c`` over jointly conflict-free plans.

    Agents in the scene start at ``current``; garage agents may enter
    their start vertex at any time from ``t_c`` on.  ``reserved`` lists
    vertices held at ``t_c`` by agents that just reached their goals.
    Limited to 3 agents, 9 vertices and a 12-step horizon.
    """
    if len(agents) > 3 or g.n > 9 or horizon > 12:
        raise UsageError("joint oracle limited to 3 agents, 9 vertices, horizon 12")
    k = len(agents)
    if k == 0:
        return 0
    goals = [a.goal for a in agents]
    starts = [a.start for a in agents]
    blocked_now = set(reserved)

    def valid(prev: tuple[int, ...] | None, cur: tuple[int, ...]) -> bool:
        seen = set()
        for p in cur:
            if p >= 0:
                if p in seen:
                    return False
                seen.add(p)
        if prev is not None:
            for i in range(k):
                a0, a1 = prev[i], cur[i]
                if a0 < 0 or a1 < 0 or a0 == a1:
                    continue
                for j in range(i + 1, k):
                    if prev[j] == a1 and cur[j] == a0:
                        return False
        return True

    initial: list[tuple[int, ...]] = [()]
    for a in agents:
        options = [a.current] if a.in_scene else [GARAGE] + ([a.start] if a.start not in blocked_now else [])
        initial = [c + (o,) for c in initial for o in options]  # type: ignore[operator]
    frontier: list[tuple[int, int, tuple[int, ...]]] = []
    for c in initial:
        if valid(None, c):
            frontier.append((0, 0, c))
    heapq.heapify(frontier)
    best: dict[tuple[int, ...], int] = {}

    def moves(i: int, p: int) -> list[int]:
        if p == DONE or p == goals[i]:
            return [DONE]
        if p == GARAGE:
            return [GARAGE, starts[i]]
        return list(g.succ[p]) + [p]

    while frontier:
        cost, steps, c = heapq.heappop(frontier)
        if best.get(c, UNREACHABLE) < cost:
            continue
        active = sum(1 for i, p in enumerate(c) if p != DONE and p != goals[i])
        if active == 0:
            return cost
        if steps >= horizon:
            continue
        options: list[tuple[int, ...]] = [()]
        for i, p in enumerate(c):
            options = [o + (m,) for o in options for m in moves(i, p)]
        for nc in options:
            if not valid(c, nc):
                continue
            ncost = cost + active
            if ncost < best.get(nc, UNREACHABLE):
                best[nc] = ncost
                heapq.heappush(frontier, (ncost, steps + 1, nc))
    return None
