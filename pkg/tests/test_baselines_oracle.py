import random

import pytest

from online_mapf.baselines import (
    SolverConfig,
    ShortcutLowLevel,
    a3_reuse_shortcut,
    astar_ts,
    make_low_level,
    rsipp,
)
from online_mapf.errors import UsageError
from online_mapf.graph import Graph, GridMap
from online_mapf.model import Agent, Constraint, ConstraintSet, Path
from online_mapf.oracle import oracle_joint_bfs, oracle_time_expanded

NONE = ConstraintSet()
V11 = ConstraintSet([Constraint.vertex(1, 1)])
GARAGE_BLOCK = ConstraintSet([Constraint.vertex(0, 0), Constraint.vertex(0, 1)])
IN_SCENE = Agent(0, 0, 0, 3, current=0)
GARAGE = Agent(0, 0, 0, 3)


@pytest.mark.parametrize(
    "agent, cons, want", [(IN_SCENE, NONE, 3), (IN_SCENE, V11, 4), (GARAGE, GARAGE_BLOCK, 2 + 3)]
)
def test_single_agent_solvers_on_corridor(corridor, agent, cons, want):
    assert oracle_time_expanded(corridor, agent, cons, 0) == want
    path, _ = astar_ts(corridor, agent, cons, 0)
    assert path.cost(0) == want and path.violations(corridor, cons) == []
    path, _ = rsipp(corridor, agent, cons, 0)
    assert path.cost(0) == want and path.violations(corridor, cons) == []


def test_oracle_rejects_short_horizon(corridor):
    with pytest.raises(UsageError):
        oracle_time_expanded(corridor, IN_SCENE, V11, 0, horizon=3)


def test_random_single_agent_agreement():
    rng = random.Random(4)
    g = GridMap.from_rows([".....", "..@..", ".@...", "....."]).to_graph()
    edges = g.edges()
    for _ in range(200):
        s, goal = rng.sample(range(g.n), 2)
        cons = ConstraintSet(
            [Constraint.vertex(rng.randrange(g.n), rng.randint(0, 8)) for _ in range(rng.randint(0, 6))]
            + [Constraint.edge(*rng.choice(edges), rng.randint(1, 8)) for _ in range(rng.randint(0, 3))]
        )
        t_c = rng.randint(0, 3)
        agent = Agent(0, 0, s, goal, current=s if rng.random() < 0.5 else None)
        want = oracle_time_expanded(g, agent, cons, t_c)
        a, _ = astar_ts(g, agent, cons, t_c)
        b, _ = rsipp(g, agent, cons, t_c)
        assert [None if p is None else p.cost(t_c) for p in (a, b)] == [want, want]


def test_a3_shortcut_reuses_suffix():
    prev = Path(2, (0, 1, 2, 3))
    assert a3_reuse_shortcut(prev, Agent(0, 0, 0, 3, current=1), 3) == Path(3, (1, 2, 3))
    assert a3_reuse_shortcut(prev, Agent(0, 0, 0, 3, current=2), 3) is None  # left the path
    assert a3_reuse_shortcut(prev, Agent(0, 0, 0, 3), 1) == prev  # entry not yet due
    assert a3_reuse_shortcut(prev, Agent(0, 0, 0, 3), 3) is None  # entry already passed
    assert a3_reuse_shortcut(None, IN_SCENE, 0) is None


def test_a3_calls_low_level_only_for_new_constraints(corridor):
    low = ShortcutLowLevel(corridor, make_low_level("a2", corridor).heuristic)
    p = low.plan(IN_SCENE, NONE, 0)
    assert low.expansions > 0
    before = low.expansions
    assert low.plan(Agent(0, 0, 0, 3, current=1), NONE, 1) == p.suffix(1)
    assert low.expansions == before and low.shortcuts == 1
    q = low.plan(Agent(0, 0, 0, 3, current=1), ConstraintSet([Constraint.vertex(2, 2)]), 1)
    assert low.expansions > before and q.cost(1) == 3


def test_joint_oracle_examples():
    g = GridMap.from_rows(["...", "@@@", "..."]).to_graph()
    a = Agent(0, 0, g.vertex_at(0, 0), g.vertex_at(2, 0), current=g.vertex_at(0, 0))
    b = Agent(1, 0, g.vertex_at(2, 2), g.vertex_at(0, 2), current=g.vertex_at(2, 2))
    assert oracle_joint_bfs(g, [a, b], 0) == 4
    nook = GridMap.from_rows(["....", ".@@@"]).to_graph()
    a = Agent(0, 0, 0, 3, current=0)
    b = Agent(1, 0, 3, 0, current=3)
    assert oracle_joint_bfs(nook, [a, b], 0) > 6
    with pytest.raises(UsageError):
        oracle_joint_bfs(GridMap.open(5, 2).to_graph(), [a], 0)


def test_joint_oracle_garage_and_reserved():
    g = Graph.corridor(3)
    # the start is held at t_c by a finished agent, so entry waits one step
    assert oracle_joint_bfs(g, [Agent(0, 0, 0, 2)], 0, reserved=[0]) == 3
    assert oracle_joint_bfs(g, [Agent(0, 0, 0, 2)], 0) == 2


def test_solver_config_validation():
    assert SolverConfig().label == "SR+SCBS+SRSIPP"
    for bad in ({"variant": "a5"}, {"heuristic": "zero"}, {"time_limit": 0}):
        with pytest.raises(UsageError):
            SolverConfig(**bad)
    with pytest.raises(UsageError):
        make_low_level("x", Graph.corridor(2))
