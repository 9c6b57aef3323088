from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from online_mapf.graph import Graph, GridMap

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def ring_map() -> GridMap:
    """4x4 grid with the centre 2x2 block blocked: columns A-D are x 0-3, rows 1-4 are y 0-3."""
    return GridMap.from_rows(["....", ".@@.", ".@@.", "...."])


def cell(g: Graph, name: str) -> int:
    """Vertex of a chessboard name such as ``"B4"``."""
    return g.vertex_at("ABCD".index(name[0]), int(name[1:]) - 1)


@pytest.fixture
def ring() -> Graph:
    return ring_map().to_graph()


@pytest.fixture
def corridor() -> Graph:
    return Graph.corridor(4)
