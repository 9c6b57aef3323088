"""Directed graphs, 4-neighbor grid maps and vertex heuristics."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path as FsPath

from .errors import MapParseError, UsageError

#: Distance marker for vertices that cannot reach the target.
UNREACHABLE = 1 << 62

Coord = tuple[int, int]


class Graph:
    """Immutable directed graph over vertices ``0 .. n-1``.

    Wait actions are not stored as edges; :meth:`neighbors` adds the
    self-loop on demand.  Grid-backed graphs also carry ``coords`` so
    Manhattan distances can be evaluated.
    """

    __slots__ = ("n", "succ", "pred", "coords", "_coord_index")

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int]],
        coords: Sequence[Coord] | None = None,
    ) -> None:
        succ: list[list[int]] = [[] for _ in range(n)]
        pred: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise UsageError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
            if u == v:
                raise UsageError(f"self-loop on {u}: waits are implicit")
            if v in succ[u]:
                continue
            succ[u].append(v)
            pred[v].append(u)
        self.n = n
        self.succ: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in succ)
        self.pred: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(p)) for p in pred)
        if coords is not None and len(coords) != n:
            raise UsageError("coords must list one coordinate per vertex")
        self.coords: tuple[Coord, ...] | None = tuple(coords) if coords is not None else None
        self._coord_index = (
            {c: i for i, c in enumerate(self.coords)} if self.coords is not None else None
        )

    def __len__(self) -> int:
        return self.n

    def check(self, v: int) -> None:
        if not (isinstance(v, int) and 0 <= v < self.n):
            raise UsageError(f"invalid vertex id {v!r}")

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.succ[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.succ[u]]

    def neighbors(self, v: int, backward: bool = False) -> tuple[int, ...]:
        """Return N(v): adjacent vertices plus ``v`` itself for the wait action.

        ``backward=True`` gives predecessors ``{u | (u, v) in E}``, which is
        the neighborhood used when searching from the goal toward the agent.
        """
        self.check(v)
        adj = self.pred[v] if backward else self.succ[v]
        return adj + (v,)

    def vertex_at(self, x: int, y: int) -> int:
        if self._coord_index is None:
            raise UsageError("graph has no coordinates")
        try:
            return self._coord_index[(x, y)]
        except KeyError:
            raise UsageError(f"no free cell at ({x}, {y})") from None

    @classmethod
    def corridor(cls, length: int) -> Graph:
        """Bidirectional line graph ``0 - 1 - ... - length-1`` laid out on row 0."""
        edges = []
        for i in range(length - 1):
            edges += [(i, i + 1), (i + 1, i)]
        return cls(length, edges, coords=[(i, 0) for i in range(length)])


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    blocked: tuple[bool, ...]  # row-major, index y * width + x

    def __post_init__(self) -> None:
        if len(self.blocked) != self.width * self.height:
            raise UsageError("blocked must have width * height entries")

    def is_free(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and not self.blocked[y * self.width + x]

    def free_cells(self) -> list[Coord]:
        return [(x, y) for y in range(self.height) for x in range(self.width) if self.is_free(x, y)]

    def to_graph(self) -> Graph:
        """4-neighbor graph over the free cells, numbered in row-major order."""
        cells = self.free_cells()
        index = {c: i for i, c in enumerate(cells)}
        edges = []
        for (x, y), i in index.items():
            for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                j = index.get((nx, ny))
                if j is not None:
                    edges.append((i, j))
        return Graph(len(cells), edges, coords=cells)

    @classmethod
    def open(cls, width: int, height: int) -> GridMap:
        return cls(width, height, (False,) * (width * height))

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> GridMap:
        height = len(rows)
        width = len(rows[0]) if rows else 0
        blocked = []
        for y, row in enumerate(rows):
            if len(row) != width:
                raise MapParseError(f"row {y} has {len(row)} cells, expected {width}")
            for ch in row:
                if ch not in ".@":
                    raise MapParseError(f"row {y}: invalid map character {ch!r}")
                blocked.append(ch == "@")
        return cls(width, height, tuple(blocked))

    def to_text(self) -> str:
        lines = [f"height {self.height}", f"width {self.width}"]
        for y in range(self.height):
            row = self.blocked[y * self.width : (y + 1) * self.width]
            lines.append("".join("@" if b else "." for b in row))
        return "\n".join(lines) + "\n"


def parse_map(text: str) -> GridMap:
    """Parse the ``height``/``width`` header followed by rows of ``.`` and ``@``.

    A leading ``type ...`` line and a ``map`` line before the rows are
    tolerated so MovingAI files load unchanged; any other character in a row
    is rejected with its line number.
    """
    lines = text.splitlines()
    pos = 0

    def header(name: str) -> int:
        nonlocal pos
        if pos >= len(lines):
            raise MapParseError(f"line {pos + 1}: missing '{name}' header")
        parts = lines[pos].split()
        if len(parts) != 2 or parts[0] != name or not parts[1].isdigit():
            raise MapParseError(f"line {pos + 1}: expected '{name} <int>', got {lines[pos]!r}")
        pos += 1
        return int(parts[1])

    if lines and lines[0].startswith("type"):
        pos = 1
    height = header("height")
    width = header("width")
    if pos < len(lines) and lines[pos].strip() == "map":
        pos += 1
    rows = lines[pos : pos + height]
    if len(rows) < height:
        raise MapParseError(f"expected {height} rows, found {len(rows)}")
    blocked: list[bool] = []
    for i, row in enumerate(rows):
        lineno = pos + i + 1
        if len(row) != width:
            raise MapParseError(f"line {lineno}: ragged row of length {len(row)}, expected {width}")
        for ch in row:
            if ch == ".":
                blocked.append(False)
            elif ch == "@":
                blocked.append(True)
            else:
                raise MapParseError(f"line {lineno}: invalid map character {ch!r}")
    for extra, row in enumerate(lines[pos + height :]):
        if row.strip():
            raise MapParseError(f"line {pos + height + extra + 1}: unexpected content after grid")
    return GridMap(width, height, tuple(blocked))


def load_map(path: str | FsPath) -> GridMap:
    return parse_map(FsPath(path).read_text())


def manhattan_h(g: Graph, v: int, target: int) -> int:
    if g.coords is None:
        raise UsageError("Manhattan distance needs a grid-backed graph")
    (x0, y0), (x1, y1) = g.coords[v], g.coords[target]
    return abs(x0 - x1) + abs(y0 - y1)


def _bfs(adj: Sequence[Sequence[int]], root: int) -> list[int]:
    dist = [UNREACHABLE] * len(adj)
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in adj[u]:
            if dist[w] == UNREACHABLE:
                dist[w] = du
                queue.append(w)
    return dist


def exact_h(g: Graph, target: int) -> list[int]:
    """Shortest distance from every vertex to ``target`` (reverse BFS)."""
    g.check(target)
    return _bfs(g.pred, target)


def exact_h_from(g: Graph, source: int) -> list[int]:
    """Shortest distance from ``source`` to every vertex (forward BFS)."""
    g.check(source)
    return _bfs(g.succ, source)


class Heuristic:
    """Per-graph cache of vertex heuristics.

    ``mode`` is ``"manhattan"`` (grid graphs only) or ``"exact"``.  The
    returned tables are lists indexed by vertex id, so the inner search
    loops avoid attribute lookups.
    """

    def __init__(self, g: Graph, mode: str = "manhattan") -> None:
        if mode not in ("manhattan", "exact"):
            raise UsageError(f"unknown heuristic {mode!r}")
        if mode == "manhattan" and g.coords is None:
            mode = "exact"
        self.graph = g
        self.mode = mode
        self._to: dict[int, list[int]] = {}
        self._from: dict[int, list[int]] = {}
        self._dist: dict[int, list[int]] = {}

    def _manhattan_table(self, anchor: int) -> list[int]:
        coords = self.graph.coords
        assert coords is not None
        ax, ay = coords[anchor]
        return [abs(x - ax) + abs(y - ay) for x, y in coords]

    def to_target(self, target: int) -> list[int]:
        """h(v) estimating the cost from v to ``target``."""
        table = self._to.get(target)
        if table is None:
            if self.mode == "exact":
                table = exact_h(self.graph, target)
            else:
                table = self._manhattan_table(target)
            self._to[target] = table
        return table

    def from_source(self, source: int) -> list[int]:
        """h(v) estimating the cost from ``source`` to v (backward search)."""
        table = self._from.get(source)
        if table is None:
            if self.mode == "exact":
                table = exact_h_from(self.graph, source)
            else:
                table = self._manhattan_table(source)
            self._from[source] = table
        return table

    def distances_to(self, target: int) -> list[int]:
        """Exact unconstrained distances to ``target``, whatever the mode."""
        table = self._dist.get(target)
        if table is None:
            table = self._dist[target] = exact_h(self.graph, target)
        return table

    def reachable(self, source: int, target: int) -> bool:
        return self.distances_to(target)[source] != UNREACHABLE
