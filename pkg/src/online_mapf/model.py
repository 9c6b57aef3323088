"""Agents, constraints, conflicts, paths and execute plans for online MAPF.

Time is discrete.  A :class:`Path` occupies ``vertices[i]`` at time
``start_time + i``; its last vertex is the goal, reached at
:attr:`Path.arrival`, after which the agent disappears.  Garage agents
occupy nothing until ``start_time``.
"""

from __future__ import annotations

import enum
import json
import struct
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property

from .errors import MapParseError, UsageError
from .graph import Graph

#: Stand-in for an unbounded interval end; larger than any reachable time.
INF_TIME = 1 << 60


def dec(t: int) -> int:
    """``t - 1`` with ``INF_TIME - 1 == INF_TIME``."""
    return t if t >= INF_TIME else t - 1


@dataclass(frozen=True)
class Agent:
    """An agent ``(start_time, start, goal)``; ``current`` is set while in the scene."""

    id: int
    start_time: int
    start: int
    goal: int
    current: int | None = None

    def __post_init__(self) -> None:
        if self.start_time < 0:
            raise UsageError(f"agent {self.id}: negative start time")

    @property
    def in_scene(self) -> bool:
        return self.current is not None

    def at(self, vertex: int | None) -> Agent:
        return replace(self, current=vertex)


class ConstraintKind(enum.IntEnum):
    VERTEX = 0
    EDGE = 1


@dataclass(frozen=True, order=True)
class Constraint:
    """Forbids occupying ``u`` at ``time`` (vertex) or moving ``u -> v`` arriving at ``time`` (edge)."""

    kind: ConstraintKind
    time: int
    u: int
    v: int = -1

    @classmethod
    def vertex(cls, v: int, time: int) -> Constraint:
        return cls(ConstraintKind.VERTEX, time, v)

    @classmethod
    def edge(cls, u: int, v: int, time: int) -> Constraint:
        return cls(ConstraintKind.EDGE, time, u, v)

    @property
    def is_vertex(self) -> bool:
        return self.kind is ConstraintKind.VERTEX

    def __str__(self) -> str:
        if self.is_vertex:
            return f"V({self.u}@{self.time})"
        return f"E({self.u}->{self.v}@{self.time})"


_EMPTY: tuple[Constraint, ...] = ()


class ConstraintSet:
    """Immutable, deduplicated constraints on one agent.

    Two sets holding the same constraints compare equal and share
    :attr:`key` regardless of insertion order, so they address the same
    planning-context entry.
    """

    __slots__ = ("items", "__dict__")

    def __init__(self, constraints: Iterable[Constraint] = _EMPTY) -> None:
        self.items: tuple[Constraint, ...] = tuple(sorted(set(constraints)))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Constraint]:
        return iter(self.items)

    def __contains__(self, c: object) -> bool:
        return c in self.items

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConstraintSet) and self.items == other.items

    def __hash__(self) -> int:
        return hash(self.items)

    def __repr__(self) -> str:
        return "ConstraintSet[" + ", ".join(map(str, self.items)) + "]"

    def add(self, c: Constraint) -> ConstraintSet:
        if c in self.items:
            return self
        return ConstraintSet(self.items + (c,))

    @cached_property
    def key(self) -> bytes:
        """Length-prefixed binary encoding of the sorted constraints."""
        parts = [struct.pack(">I", len(self.items))]
        for c in self.items:
            parts.append(struct.pack(">Bqqq", int(c.kind), c.time, c.u, c.v))
        return b"".join(parts)

    @cached_property
    def vertex_times(self) -> dict[int, tuple[int, ...]]:
        """Sorted forbidden times per vertex."""
        out: dict[int, list[int]] = {}
        for c in self.items:
            if c.is_vertex:
                out.setdefault(c.u, []).append(c.time)
        return {v: tuple(sorted(ts)) for v, ts in out.items()}

    @cached_property
    def vertex_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((c.u, c.time) for c in self.items if c.is_vertex)

    @cached_property
    def edge_times(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """Sorted forbidden arrival times per directed move ``(u, v)``."""
        out: dict[tuple[int, int], list[int]] = {}
        for c in self.items:
            if not c.is_vertex:
                out.setdefault((c.u, c.v), []).append(c.time)
        return {e: tuple(sorted(ts)) for e, ts in out.items()}

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int, int]]:
        return frozenset((c.u, c.v, c.time) for c in self.items if not c.is_vertex)

    @cached_property
    def max_time(self) -> int:
        return max((c.time for c in self.items), default=-1)

    def blocks_vertex(self, v: int, t: int) -> bool:
        return (v, t) in self.vertex_set

    def blocks_move(self, u: int, v: int, t: int) -> bool:
        return (u, v, t) in self.edge_set

    def validate(self, g: Graph) -> None:
        for c in self.items:
            if c.is_vertex:
                g.check(c.u)
            elif not g.has_edge(c.u, c.v):
                raise UsageError(f"edge constraint {c} does not reference an edge")


EMPTY_CONSTRAINTS = ConstraintSet()


@dataclass(frozen=True)
class Path:
    start_time: int
    vertices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.vertices:
            raise UsageError("a path needs at least one vertex")

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def arrival(self) -> int:
        return self.start_time + len(self.vertices) - 1

    @property
    def goal(self) -> int:
        return self.vertices[-1]

    def at(self, t: int) -> int | None:
        """Occupied vertex at ``t``; ``None`` in the garage or after disappearing."""
        i = t - self.start_time
        if 0 <= i < len(self.vertices):
            return self.vertices[i]
        return None

    def cost(self, t_c: int) -> int:
        """Arrival time minus ``t_c``; garage waiting after ``t_c`` counts."""
        return self.arrival - t_c

    def suffix(self, t: int) -> Path:
        i = t - self.start_time
        if i <= 0:
            return self
        return Path(t, self.vertices[i:])

    def violations(self, g: Graph, cons: ConstraintSet) -> list[str]:
        """Reasons this path is invalid on ``g`` under ``cons`` (empty when valid)."""
        out = []
        t = self.start_time
        prev = None
        for v in self.vertices:
            if cons.blocks_vertex(v, t):
                out.append(f"vertex constraint ({v}, {t})")
            if prev is not None:
                if prev != v and not g.has_edge(prev, v):
                    out.append(f"no edge {prev}->{v} at {t}")
                if cons.blocks_move(prev, v, t):
                    out.append(f"edge constraint ({prev}->{v}, {t})")
            prev = v
            t += 1
        return out


PlanSnapshot = dict[int, Path]


class ConflictKind(enum.IntEnum):
    VERTEX = 0
    EDGE = 1


@dataclass(frozen=True, order=True)
class Conflict:
    """A collision at ``time``.  For edge conflicts ``agents[0]`` moves ``u -> v``."""

    time: int
    agents: tuple[int, int]
    kind: ConflictKind
    u: int
    v: int = -1


def find_earliest_conflict(paths: Mapping[int, Path]) -> Conflict | None:
    """Earliest conflict; ties go to the lower agent pair, then vertex before edge.

    Agents in the garage (before ``start_time``) and agents that already
    disappeared at their goal occupy nothing and cannot collide.
    """
    if len(paths) < 2:
        return None
    items = sorted(paths.items())
    t0 = min(p.start_time for _, p in items)
    t1 = max(p.arrival for _, p in items)
    for t in range(t0, t1 + 1):
        occupant: dict[int, int] = {}
        found: list[Conflict] = []
        moves: dict[tuple[int, int], int] = {}
        for a, p in items:
            i = t - p.start_time
            if i < 0 or i >= len(p.vertices):
                continue
            v = p.vertices[i]
            other = occupant.get(v)
            if other is not None:
                found.append(Conflict(t, (other, a), ConflictKind.VERTEX, v))
            else:
                occupant[v] = a
            if i > 0:
                u = p.vertices[i - 1]
                if u != v:
                    b = moves.get((v, u))
                    if b is not None:
                        found.append(Conflict(t, (b, a), ConflictKind.EDGE, v, u))
                    moves[(u, v)] = a
        if found:
            return min(found, key=lambda c: (c.agents, c.kind))
    return None


def split_conflict(c: Conflict) -> tuple[tuple[int, Constraint], tuple[int, Constraint]]:
    """Standard binary CBS split: one constraint for each involved agent."""
    a, b = c.agents
    if c.kind is ConflictKind.VERTEX:
        return (a, Constraint.vertex(c.u, c.time)), (b, Constraint.vertex(c.u, c.time))
    return (a, Constraint.edge(c.u, c.v, c.time)), (b, Constraint.edge(c.v, c.u, c.time))


def soc(paths: Mapping[int, Path], t_c: int, goals: Mapping[int, int] | None = None) -> int:
    """Sum over agents of ``arrival - t_c``.

    With ``goals`` given, a path that does not end at its agent's goal is a
    usage error.
    """
    total = 0
    for a, p in paths.items():
        if goals is not None and p.goal != goals[a]:
            raise UsageError(f"path of agent {a} does not reach its goal")
        total += p.cost(t_c)
    return total


@dataclass
class ExecutePlan:
    """Spliced actual trajectories, one :class:`Path` per agent."""

    paths: dict[int, Path] = field(default_factory=dict)

    def splice(self, t_new: int, snapshot: Mapping[int, Path]) -> None:
        """Keep every vertex occupied before ``t_new``; take the rest from ``snapshot``."""
        for a, new in snapshot.items():
            old = self.paths.get(a)
            if new.start_time < t_new:
                raise UsageError(f"agent {a}: replanned path starts before {t_new}")
            if old is None or old.start_time >= t_new:
                # never entered before t_new: the entry decision is replaced too
                self.paths[a] = new
                continue
            if new.start_time != t_new or old.at(t_new) != new.vertices[0]:
                raise UsageError(f"agent {a}: new path does not continue from its position at {t_new}")
            keep = old.vertices[: t_new - old.start_time]
            self.paths[a] = Path(old.start_time, keep + new.vertices)

    def position(self, agent: int, t: int) -> int | None:
        p = self.paths.get(agent)
        return None if p is None else p.at(t)

    def entry_time(self, agent: int) -> int:
        return self.paths[agent].start_time

    def arrival(self, agent: int) -> int:
        return self.paths[agent].arrival

    def to_json(self) -> dict[str, dict[str, object]]:
        return {
            str(a): {"entry": p.start_time, "arrival": p.arrival, "vertices": list(p.vertices)}
            for a, p in sorted(self.paths.items())
        }


def replay_execute_plan(snapshots: Sequence[tuple[int, Mapping[int, Path]]]) -> ExecutePlan:
    """Rebuild the execute plan from ``(t_new_j, pi_j)`` pairs by concatenation.

    Agent ``i`` follows ``pi_j`` on ``[t_new_j, t_new_{j+1})`` and the last
    snapshot that mentions it afterwards.
    """
    segments: dict[int, list[int]] = {}
    entry: dict[int, int] = {}
    times = [t for t, _ in snapshots]
    for j, (t_j, snap) in enumerate(snapshots):
        t_next = times[j + 1] if j + 1 < len(times) else None
        for a, p in snap.items():
            lo = max(t_j, p.start_time)
            hi = p.arrival + 1 if t_next is None else min(t_next, p.arrival + 1)
            if t_next is not None and a not in snapshots[j + 1][1] and p.arrival >= t_next:
                hi = p.arrival + 1
            for t in range(lo, hi):
                if a not in entry:
                    entry[a] = t
                    segments[a] = []
                segments[a].append(p.vertices[t - p.start_time])
    return ExecutePlan({a: Path(entry[a], tuple(vs)) for a, vs in segments.items()})


# -- scenario and plan-dump formats -------------------------------------------------


def parse_scenario(text: str, g: Graph) -> list[Agent]:
    """One agent per line: ``t_s x_s y_s x_g y_g``; blank lines and ``#`` comments skipped.

    Agent ids follow line order; the result is stably sorted by start time.
    """
    agents = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise MapParseError(f"line {lineno}: expected 5 integers, got {len(parts)} fields")
        try:
            ts, xs, ys, xg, yg = (int(p) for p in parts)
        except ValueError:
            raise MapParseError(f"line {lineno}: non-integer field in {raw!r}") from None
        try:
            start, goal = g.vertex_at(xs, ys), g.vertex_at(xg, yg)
        except UsageError as exc:
            raise MapParseError(f"line {lineno}: {exc}") from None
        if ts < 0:
            raise MapParseError(f"line {lineno}: negative start time")
        if start == goal:
            raise MapParseError(f"line {lineno}: start equals goal")
        agents.append(Agent(len(agents), ts, start, goal))
    return sorted(agents, key=lambda a: a.start_time)


def format_scenario(agents: Sequence[Agent], g: Graph) -> str:
    assert g.coords is not None
    lines = []
    for a in sorted(agents, key=lambda a: a.id):
        (xs, ys), (xg, yg) = g.coords[a.start], g.coords[a.goal]
        lines.append(f"{a.start_time} {xs} {ys} {xg} {yg}")
    return "\n".join(lines) + "\n"


def plan_dump(iterations: Sequence[tuple[int, Mapping[int, Path], int]]) -> str:
    """JSON list of ``{t, paths: {agent: [vertex, ...]}, soc}``; keys sorted, one iteration per line."""
    rows = []
    for t, snap, cost in iterations:
        paths = {str(a): {"start": p.start_time, "vertices": list(p.vertices)} for a, p in sorted(snap.items())}
        rows.append(json.dumps({"t": t, "paths": paths, "soc": cost}, sort_keys=True))
    return "[\n" + ",\n".join(rows) + "\n]\n"
