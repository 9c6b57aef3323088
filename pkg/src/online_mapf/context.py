"""The planning-context table: agent id -> constraint-set key -> reusable search state."""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

from .errors import UsageError
from .model import ConstraintSet
from .srsipp import SearchContext


class PlanningContext:
    """Two-level store of per-(agent, constraints) search contexts.

    An entry is checked out by :meth:`get_ipc` and must be returned with
    :meth:`put_ipc` before it can be checked out again.  ``factory`` builds
    the value handed out on a miss; the default is an empty
    :class:`SearchContext`, the A3 baseline stores plain paths instead.
    """

    def __init__(self, factory: Callable[[], Any] = SearchContext) -> None:
        self._factory = factory
        self._table: dict[int, dict[bytes, Any]] = {}
        self._checked_out: set[tuple[int, bytes]] = set()
        self.hits = 0
        self.misses = 0

    def get_ipc(self, agent: int, cons: ConstraintSet) -> Any:
        key = cons.key
        slot = (agent, key)
        if slot in self._checked_out:
            raise UsageError(f"context of agent {agent} for {cons} is already checked out")
        self._checked_out.add(slot)
        entry = self._table.get(agent, {}).get(key)
        if entry is None:
            self.misses += 1
            return self._factory()
        self.hits += 1
        return entry

    def put_ipc(self, agent: int, cons: ConstraintSet, ctx: Any) -> None:
        slot = (agent, cons.key)
        if slot not in self._checked_out:
            raise UsageError(f"context of agent {agent} for {cons} was not checked out")
        self._checked_out.discard(slot)
        self._table.setdefault(agent, {})[cons.key] = ctx

    def purge_agent(self, agent: int) -> None:
        self._table.pop(agent, None)
        self._checked_out = {s for s in self._checked_out if s[0] != agent}

    def agents(self) -> list[int]:
        return sorted(self._table)

    def __contains__(self, item: tuple[int, ConstraintSet]) -> bool:
        agent, cons = item
        return cons.key in self._table.get(agent, {})

    @property
    def entries(self) -> int:
        return sum(len(d) for d in self._table.values())

    def resident_states(self) -> int:
        total = 0
        for d in self._table.values():
            for ctx in d.values():
                if isinstance(ctx, SearchContext):
                    total += ctx.resident_states()
                elif ctx is not None:
                    total += len(ctx)
        return total

    @property
    def hit_rate(self) -> float:
        n = self.hits + self.misses
        return self.hits / n if n else 0.0

    def metrics(self) -> dict[str, float]:
        return {
            "hits": self.hits,
            "misses": self.misses,
            "entries": self.entries,
            "resident_states": self.resident_states(),
        }
