"""Conflict-tree search over per-agent constraint sets.

The low-level planner decides whether planning context is reused: with
:class:`~.baselines.SustainableLowLevel` every call checks the
(agent, constraints) context out of the planning-context table and puts it
back afterwards; the other planners make this plain CBS.
"""

from __future__ import annotations

import heapq
import itertools
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

from .errors import InvariantError, Unsolvable
from .model import (
    EMPTY_CONSTRAINTS,
    Agent,
    Conflict,
    ConstraintSet,
    Path,
    find_earliest_conflict,
    soc,
    split_conflict,
)


@dataclass
class CTNode:
    cons: dict[int, ConstraintSet]
    paths: dict[int, Path]
    cost: int
    id: int = 0
    parent: int | None = None
    n_cons: int = 0


@dataclass
class SCBSResult:
    paths: dict[int, Path]
    cost: int
    ct_expanded: int
    ct_generated: int
    trace: list[str] = field(default_factory=list)


def ct_expand(
    node: CTNode,
    conflict: Conflict,
    agents: Mapping[int, Agent],
    t_c: int,
    low_level,
    ids: Callable[[], int],
    validate: bool = False,
) -> list[CTNode]:
    """Children of ``node`` for the two constraints split from ``conflict``.

    A child whose constrained agent has no path is dropped.
    """
    children = []
    for a, c in split_conflict(conflict):
        cons = node.cons.get(a, EMPTY_CONSTRAINTS).add(c)
        path = low_level.plan(agents[a], cons, t_c)
        if path is None:
            continue
        if validate:
            bad = path.violations(low_level.graph, cons)
            if bad:
                raise InvariantError(f"agent {a} path violates {bad}")
        child_cons = dict(node.cons)
        child_cons[a] = cons
        paths = dict(node.paths)
        paths[a] = path
        children.append(
            CTNode(child_cons, paths, soc(paths, t_c), ids(), node.id, node.n_cons + 1)
        )
    return children


def scbs_solve(
    agents: Sequence[Agent],
    t_c: int,
    low_level,
    root_cons: Mapping[int, ConstraintSet] | None = None,
    check_deadline: Callable[[], None] | None = None,
    validate: bool = False,
    trace: bool = False,
) -> SCBSResult:
    """Conflict-free plans minimising the sum of ``arrival - t_c``.

    Each agent is either in the scene (``current`` set) or in the garage.
    ``root_cons`` seeds per-agent constraints at the root.  Raises
    :class:`Unsolvable` when some agent has no path at the root.
    """
    by_id = {a.id: a for a in agents}
    counter = itertools.count()
    next_id = lambda: next(counter)  # noqa: E731
    cons0 = {a.id: (root_cons or {}).get(a.id, EMPTY_CONSTRAINTS) for a in agents}
    paths = {}
    for a in agents:
        path = low_level.plan(a, cons0[a.id], t_c)
        if path is None:
            raise Unsolvable(f"agent {a.id} has no path at t={t_c}")
        paths[a.id] = path
    root = CTNode(cons0, paths, soc(paths, t_c), next_id(), None, sum(len(c) for c in cons0.values()))
    lines: list[str] = []
    # equal cost: fewer constraints first, then FIFO
    open_list = [(root.cost, root.n_cons, root.id, root)]
    generated = 1
    expanded = 0
    while open_list:
        if check_deadline is not None:
            check_deadline()
        _, _, _, node = heapq.heappop(open_list)
        conflict = find_earliest_conflict(node.paths)
        if trace:
            lines.append(f"node={node.id} parent={node.parent} cost={node.cost} conflict={conflict}")
        if conflict is None:
            return SCBSResult(node.paths, node.cost, expanded, generated, lines)
        expanded += 1
        for child in ct_expand(node, conflict, by_id, t_c, low_level, next_id, validate):
            generated += 1
            heapq.heappush(open_list, (child.cost, child.n_cons, child.id, child))
    raise Unsolvable(f"conflict tree exhausted at t={t_c}")
