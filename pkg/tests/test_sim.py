import random

import pytest

from conftest import cell, ring_map
from online_mapf.baselines import SolverConfig, make_low_level
from online_mapf.errors import UsageError
from online_mapf.graph import Graph, GridMap, Heuristic
from online_mapf.model import Agent, Path, find_earliest_conflict, replay_execute_plan
from online_mapf.sim import OnlineInstance, SimulationState, entry_blocks, run_online, sr_step


def ring_state(path_names):
    """Simulation state at t=0 in which a1 (A4 -> D1) has been given ``path_names``."""
    g = ring_map().to_graph()
    a1 = Agent(1, 0, cell(g, "A4"), cell(g, "D1"))
    state = SimulationState(make_low_level("a4", g))
    state.active[1] = a1
    state.t_c = 0
    state.ex.splice(0, {1: Path(0, tuple(cell(g, n) for n in path_names))})
    return g, state


P1 = ["A4", "B4", "C4", "D4", "D3", "D2", "D1"]
P2 = ["A4", "A3", "A2", "A1", "B1", "C1", "D1"]


def test_ring_first_instance_keeps_course():
    g, state = ring_state(P1)
    sr_step(state, 1, [Agent(2, 1, cell(g, "C1"), cell(g, "A2"))])
    assert state.ex.paths[1] == Path(0, tuple(cell(g, n) for n in P1))
    assert state.ex.arrival(1) == 6


def test_ring_second_instance_detours():
    g, state = ring_state(P1)
    sr_step(state, 1, [Agent(2, 1, cell(g, "D2"), cell(g, "C4"))])
    names = ["A4", "B4", "A4", "A3", "A2", "A1", "B1", "C1", "D1"]
    assert state.ex.paths[1] == Path(0, tuple(cell(g, n) for n in names))
    assert state.records[-1].soc == 10


def test_ring_full_runs_are_symmetric():
    g = ring_map().to_graph()
    a1 = Agent(1, 0, cell(g, "A4"), cell(g, "D1"))
    inst1 = OnlineInstance(g, [a1, Agent(2, 1, cell(g, "C1"), cell(g, "A2"))])
    inst2 = OnlineInstance(g, [a1, Agent(2, 1, cell(g, "D2"), cell(g, "C4"))])
    for variant in ("a1", "a2", "a3", "a4"):
        r1 = run_online(inst1, SolverConfig(variant))
        r2 = run_online(inst2, SolverConfig(variant))
        first_move = r1.execute_plan.position(1, 1)
        assert first_move == r2.execute_plan.position(1, 1)
        # whichever way a1 set off, one instance leaves it alone and the other costs a detour
        took_p1 = first_move == cell(g, "B4")
        assert r1.execute_plan.arrival(1) == (6 if took_p1 else 8)
        assert r2.execute_plan.arrival(1) == (8 if took_p1 else 6)


def test_agent_finishing_at_replanning_time_is_removed():
    g = Graph.corridor(5)
    state = SimulationState(make_low_level("a4", g))
    sr_step(state, 0, [Agent(0, 0, 0, 2)])
    assert state.ex.arrival(0) == 2
    assert state.pc.agents() == [0]
    sr_step(state, 2, [Agent(1, 2, 2, 4)])
    assert 0 not in state.active and state.pc.agents() == [1]
    rec = state.records[-1]
    assert rec.reserved == (2,)
    # the new agent may not enter the vertex its predecessor vacates at t=2
    assert state.ex.entry_time(1) == 3


def test_entry_blocks_only_for_garage_agents_on_reserved_vertices():
    agents = [Agent(0, 0, 3, 5), Agent(1, 0, 4, 5), Agent(2, 0, 3, 6, current=7)]
    got = entry_blocks(agents, [3], 4)
    assert list(got) == [0] and str(next(iter(got[0]))) == "V(3@4)"


def test_step_without_new_agents_is_skipped():
    g = Graph.corridor(3)
    state = SimulationState(make_low_level("a4", g))
    assert sr_step(state, 0, []) is state and state.records == [] and state.t_c == -1


def test_step_validation():
    g = Graph.corridor(3)
    state = SimulationState(make_low_level("a2", g))
    sr_step(state, 1, [Agent(0, 1, 0, 2)])
    with pytest.raises(UsageError):
        sr_step(state, 1, [Agent(1, 1, 1, 2)])
    with pytest.raises(UsageError):
        sr_step(state, 3, [Agent(1, 2, 1, 2)])


def test_two_waves_record_two_snapshots():
    g = GridMap.open(4, 4).to_graph()
    agents = [Agent(0, 1, 0, 15), Agent(1, 1, 3, 12), Agent(2, 4, 12, 3)]
    rep = run_online(OnlineInstance(g, agents, "waves"))
    assert rep.success and [r.t for r in rep.iterations] == [1, 4]
    assert len(rep.plan_dump().splitlines()) == 4  # brackets plus one line per iteration


def test_single_agent_follows_shortest_path():
    g = GridMap.open(5, 3).to_graph()
    rep = run_online(OnlineInstance(g, [Agent(0, 2, g.vertex_at(0, 0), g.vertex_at(4, 2))]))
    p = rep.execute_plan.paths[0]
    assert p.start_time == 2 and len(p) - 1 == 6 and rep.soc == 6


def test_timeout_reports_limit():
    g = GridMap.open(4, 4).to_graph()
    cfg = SolverConfig("a4", time_limit=1e-9)
    rep = run_online(OnlineInstance(g, [Agent(0, 0, 0, 15), Agent(1, 0, 15, 0)]), cfg)
    assert not rep.success and rep.status == "timeout" and rep.total_time_s == 1e-9


def _random_online(rng, g, k, horizon):
    free = list(range(g.n))
    agents = []
    for i in range(k):
        s, t = rng.sample(free, 2)
        agents.append(Agent(i, rng.randint(0, horizon), s, t))
    return OnlineInstance(g, agents)


def test_random_runs_are_conflict_free_and_bounded():
    rng = random.Random(8)
    g = GridMap.from_rows(["......", ".@..@.", "......", "..@..."]).to_graph()
    h = Heuristic(g)
    for _ in range(25):
        inst = _random_online(rng, g, 5, 6)
        rep = run_online(inst, SolverConfig("a4"), h)
        assert rep.success
        ex = rep.execute_plan
        assert find_earliest_conflict(ex.paths) is None
        snaps = [(r.t, r.snapshot) for r in rep.iterations]
        assert replay_execute_plan(snaps).paths == ex.paths
        arrivals = inst.arrival_times()
        for a in inst.agents:
            seen = sum(a.id in r.snapshot for r in rep.iterations)
            assert seen <= sum(t > a.start_time for t in arrivals) + 1
        # an executed prefix never changes once a later iteration is spliced in
        for (t0, s0), (t1, _) in zip(snaps, snaps[1:]):
            for aid, p in s0.items():
                for t in range(p.start_time, t1):
                    assert ex.position(aid, t) == p.at(t)


def test_variants_agree_per_iteration():
    rng = random.Random(9)
    g = GridMap.open(4, 4).to_graph()
    h = Heuristic(g)
    for _ in range(15):
        inst = _random_online(rng, g, 4, 4)
        socs = {v: [r.soc for r in run_online(inst, SolverConfig(v), h).iterations] for v in ("a1", "a2", "a3", "a4")}
        assert len(set(map(tuple, socs.values()))) == 1


def test_report_json_fields():
    g = Graph.corridor(3)
    rep = run_online(OnlineInstance(g, [Agent(0, 0, 0, 2)], "c3"))
    js = rep.to_json()
    assert js["instance_id"] == "c3" and js["success"] and js["low_level"]["calls"] == rep.ll_calls == 1
    assert set(js["iterations"][0]) >= {"t", "soc", "ll_expansions", "ct_nodes", "ctx_hits"}


def test_instance_validation():
    g = Graph.corridor(3)
    with pytest.raises(UsageError):
        OnlineInstance(g, [Agent(0, 0, 0, 2), Agent(0, 1, 1, 2)])
    with pytest.raises(UsageError):
        OnlineInstance(g, [Agent(0, 0, 1, 1)])
