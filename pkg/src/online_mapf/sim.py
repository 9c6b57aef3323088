"""Event-driven online simulation: replan all agents whenever new ones start."""

from __future__ import annotations

import itertools
import json
import time
from collections.abc import Sequence
from dataclasses import dataclass, field

from .baselines import Deadline, LowLevel, SolverConfig, make_low_level
from .errors import SolverTimeout, Unsolvable, UsageError
from .graph import Graph, Heuristic
from .model import Agent, Constraint, ConstraintSet, ExecutePlan, Path, plan_dump
from .scbs import scbs_solve


@dataclass
class OnlineInstance:
    graph: Graph
    agents: list[Agent]
    name: str = ""

    def __post_init__(self) -> None:
        self.agents = sorted(self.agents, key=lambda a: (a.start_time, a.id))
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise UsageError("agent ids must be unique")
        for a in self.agents:
            self.graph.check(a.start)
            self.graph.check(a.goal)
            if a.start == a.goal:
                raise UsageError(f"agent {a.id}: start equals goal")

    def arrival_times(self) -> list[int]:
        return sorted({a.start_time for a in self.agents})

    def waves(self) -> list[tuple[int, list[Agent]]]:
        return [(t, list(grp)) for t, grp in itertools.groupby(self.agents, key=lambda a: a.start_time)]


@dataclass
class IterationRecord:
    t: int
    agents: tuple[Agent, ...]  # agents as planned: current vertex set while in the scene
    reserved: tuple[int, ...]  # goal vertices of agents that finished exactly at t
    snapshot: dict[int, Path]
    soc: int
    wall_time: float
    ll_calls: int
    ll_expansions: int
    ct_nodes: int
    ctx_hits: int
    ctx_misses: int

    def summary(self) -> dict[str, object]:
        return {
            "t": self.t,
            "soc": self.soc,
            "agents": len(self.agents),
            "wall_time_s": round(self.wall_time, 6),
            "ll_calls": self.ll_calls,
            "ll_expansions": self.ll_expansions,
            "ct_nodes": self.ct_nodes,
            "ctx_hits": self.ctx_hits,
        }


@dataclass
class SimulationState:
    low_level: LowLevel
    t_c: int = -1
    active: dict[int, Agent] = field(default_factory=dict)
    ex: ExecutePlan = field(default_factory=ExecutePlan)
    records: list[IterationRecord] = field(default_factory=list)
    deadline: Deadline | None = None

    @property
    def pc(self):
        return self.low_level.pc


def entry_blocks(agents: Sequence[Agent], reserved: Sequence[int], t: int) -> dict[int, ConstraintSet]:
    """Root constraints keeping garage agents off vertices still held at ``t``."""
    held = set(reserved)
    out = {}
    for a in agents:
        if not a.in_scene and a.start in held:
            out[a.id] = ConstraintSet([Constraint.vertex(a.start, t)])
    return out


def sr_step(state: SimulationState, t_new: int, new_agents: Sequence[Agent]) -> SimulationState:
    """Advance to ``t_new``, admit ``new_agents`` and replan everyone.

    Agents whose execute plan reached the goal by ``t_new`` leave the scene
    and lose their planning context; the rest take their position at
    ``t_new`` from the execute plan.  An agent that has not occupied a
    vertex before ``t_new`` is still in the garage and its entry time is
    decided again.
    """
    if not new_agents:
        return state
    if t_new <= state.t_c:
        raise UsageError(f"replanning time {t_new} does not advance past {state.t_c}")
    for a in new_agents:
        if a.start_time != t_new:
            raise UsageError(f"agent {a.id} starts at {a.start_time}, not {t_new}")
        if a.id in state.active:
            raise UsageError(f"agent {a.id} is already active")
    t0 = time.perf_counter()
    reserved = []
    for aid in sorted(state.active):
        p = state.ex.paths.get(aid)
        if p is not None and p.arrival <= t_new:
            del state.active[aid]
            state.low_level.purge(aid)
            if p.arrival == t_new:
                reserved.append(p.goal)
        elif p is not None and p.start_time < t_new:
            state.active[aid] = state.active[aid].at(p.at(t_new))
        else:
            state.active[aid] = state.active[aid].at(None)
    for a in new_agents:
        state.active[a.id] = a.at(None)
    agents = [state.active[aid] for aid in sorted(state.active)]
    root_cons = entry_blocks(agents, reserved, t_new)

    before = state.low_level.counters()
    check = state.deadline.check if state.deadline is not None else None
    result = scbs_solve(agents, t_new, state.low_level, root_cons, check_deadline=check)
    after = state.low_level.counters()
    state.ex.splice(t_new, result.paths)
    state.t_c = t_new
    state.records.append(
        IterationRecord(
            t=t_new,
            agents=tuple(agents),
            reserved=tuple(sorted(reserved)),
            snapshot=result.paths,
            soc=result.cost,
            wall_time=time.perf_counter() - t0,
            ll_calls=after["calls"] - before["calls"],
            ll_expansions=after["expansions"] - before["expansions"],
            ct_nodes=result.ct_generated,
            ctx_hits=after["ctx_hits"] - before["ctx_hits"],
            ctx_misses=after["ctx_misses"] - before["ctx_misses"],
        )
    )
    return state


@dataclass
class RunReport:
    instance_id: str
    solver: str
    success: bool
    status: str  # "success" | "timeout" | "unsolvable"
    total_time_s: float
    iterations: list[IterationRecord]
    execute_plan: ExecutePlan
    ctx_metrics: dict[str, float] = field(default_factory=dict)
    # low-level totals over the whole run, the unfinished iteration included
    counters: dict[str, int] = field(default_factory=dict)

    @property
    def ll_calls(self) -> int:
        return self.counters.get("calls", 0)

    @property
    def ll_expansions(self) -> int:
        return self.counters.get("expansions", 0)

    @property
    def expansions_per_call(self) -> float:
        return self.ll_expansions / self.ll_calls if self.ll_calls else 0.0

    @property
    def ctx_hits(self) -> int:
        return self.counters.get("ctx_hits", 0)

    @property
    def ctx_lookups(self) -> int:
        return self.ctx_hits + self.counters.get("ctx_misses", 0)

    @property
    def soc(self) -> int:
        return sum(r.soc for r in self.iterations)

    def to_json(self) -> dict[str, object]:
        return {
            "instance_id": self.instance_id,
            "solver": self.solver,
            "success": self.success,
            "status": self.status,
            "total_time_s": self.total_time_s,
            "iterations": [r.summary() for r in self.iterations],
            "ctx": self.ctx_metrics,
            "low_level": dict(sorted(self.counters.items())),
            "execute_plan": self.execute_plan.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def plan_dump(self) -> str:
        return plan_dump([(r.t, r.snapshot, r.soc) for r in self.iterations])


def run_online(
    instance: OnlineInstance,
    config: SolverConfig | None = None,
    heuristic: Heuristic | None = None,
) -> RunReport:
    """Replan at every arrival time of ``instance`` with the configured variant.

    A run that exceeds ``config.time_limit`` fails and reports the limit as
    its running time.
    """
    config = config or SolverConfig()
    if heuristic is None:
        heuristic = Heuristic(instance.graph, config.heuristic)
    deadline = Deadline(config.time_limit)
    low = make_low_level(config.variant, instance.graph, heuristic, deadline)
    state = SimulationState(low, deadline=deadline)
    status = "success"
    try:
        for t, wave in instance.waves():
            sr_step(state, t, wave)
    except SolverTimeout:
        status = "timeout"
    except Unsolvable:
        status = "unsolvable"
    elapsed = deadline.elapsed
    if status == "timeout":
        elapsed = config.time_limit
    metrics = low.pc.metrics() if low.pc is not None else {}
    return RunReport(
        instance_id=instance.name,
        solver=config.variant,
        success=status == "success",
        status=status,
        total_time_s=elapsed,
        iterations=state.records,
        execute_plan=state.ex,
        ctx_metrics=metrics,
        counters=low.counters(),
    )
