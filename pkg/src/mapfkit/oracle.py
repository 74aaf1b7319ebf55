"""Brute-force optimal MAPF solver over the joint configuration space.

Used as a test oracle only. It is a uniform-cost search that shares no code
with the heuristics or solvers it checks, and it refuses instances whose
joint branching factor is too large rather than risk a wrong answer.
"""

from __future__ import annotations

import heapq
from typing import Iterator

from .core import Config, Instance, Objective, edge_cost_fn

# Refuse instances whose per-expansion budget (max degree + 1)^n exceeds this.
MAX_EXPANSION_BUDGET = 10**6

_BIG = 1 << 62


class OracleLimitError(ValueError):
    """The instance is too large for exhaustive search."""


def _check_size(instance: Instance) -> None:
    grid = instance.grid
    if grid.num_vertices == 0:
        raise OracleLimitError("graph has no vertices")
    max_degree = max(grid.degree(v) for v in range(grid.num_vertices))
    if (max_degree + 1) ** instance.n > MAX_EXPANSION_BUDGET:
        raise OracleLimitError(
            f"joint branching ({max_degree + 1})^{instance.n} exceeds "
            f"{MAX_EXPANSION_BUDGET}; oracle refuses"
        )


def _successors(instance: Instance, q: Config) -> Iterator[Config]:
    """All configurations connected to ``q`` (collision-free by construction)."""
    grid = instance.grid
    n = len(q)
    at = {v: i for i, v in enumerate(q)}
    assigned: list[int] = [0] * n
    used: set[int] = set()

    def rec(i: int) -> Iterator[Config]:
        if i == n:
            yield tuple(assigned)
            return
        here = q[i]
        for v in (here, *grid.neighbors(here)):
            if v in used:
                continue
            j = at.get(v)
            # Exchange check against already-fixed agents; later agents get
            # the symmetric check when their own candidate is examined.
            if j is not None and j < i and assigned[j] == here:
                continue
            assigned[i] = v
            used.add(v)
            yield from rec(i + 1)
            used.discard(v)
        return

    yield from rec(0)


def optimal_cost(instance: Instance, objective: Objective) -> int | None:
    """Exact optimal solution cost, or None when the instance is unsolvable.

    Uniform-cost search over connected, collision-free configuration
    transitions. Raises :class:`OracleLimitError` on oversized instances.
    """
    _check_size(instance)
    start, goal = instance.starts, instance.goals
    ecost = edge_cost_fn(objective, instance.goals)
    best: dict[Config, int] = {start: 0}
    counter = 0
    heap: list[tuple[int, int, Config]] = [(0, counter, start)]
    while heap:
        cost, _, q = heapq.heappop(heap)
        if cost > best[q]:  # stale entry
            continue
        if q == goal:
            return cost
        for nxt in _successors(instance, q):
            c = cost + ecost(q, nxt)
            if c < best.get(nxt, _BIG):
                best[nxt] = c
                counter += 1
                heapq.heappush(heap, (c, counter, nxt))
    return None


def is_solvable(instance: Instance) -> bool:
    """BFS reachability of the goal configuration from the start."""
    _check_size(instance)
    start, goal = instance.starts, instance.goals
    if start == goal:
        return True
    seen = {start}
    frontier = [start]
    while frontier:
        nxt_frontier = []
        for q in frontier:
            for nxt in _successors(instance, q):
                if nxt in seen:
                    continue
                if nxt == goal:
                    return True
                seen.add(nxt)
                nxt_frontier.append(nxt)
        frontier = nxt_frontier
    return False
