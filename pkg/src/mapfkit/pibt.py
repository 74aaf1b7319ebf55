"""One-step configuration generation with priority inheritance.

Given a configuration, :func:`plan_step` produces a connected successor by
assigning each agent a next vertex greedily by goal distance. When the
desired vertex is occupied by a not-yet-planned agent, that agent is planned
first (priority inheritance); if it cannot make way, the requester falls
back to its next candidate (backtracking).

The optional swap mechanism detects head-to-head patterns in narrow
passages with two bounded emulations and makes the blocked agent retreat,
pulling its counterpart along, so the pair can rotate around a vertex of
degree three or more instead of livelocking.

Externally imposed pins (agent -> vertex for the next step) are honored
exactly; they are how the high-level search steers this generator.
"""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from typing import Sequence

from .core import Config
from .grid import UNREACHABLE, VertexGraph

_NO_AGENT = -1
_UNDECIDED = -1


class PinError(ValueError):
    """Pins were malformed: off-neighborhood or mutually colliding."""


def initial_priorities(n: int) -> list[float]:
    """Base priorities: zero integer part, agent-id fraction as tie-break."""
    return [(n - i - 1) / n for i in range(n)]


def bumped_priorities(
    previous: Sequence[float], q: Config, goals: Config
) -> list[float]:
    """Advance priorities by one step taken at configuration ``q``.

    Agents away from their goal gain 1; agents on their goal reset to the
    base value. The fractional agent-id tie-break is preserved, so all
    priorities stay pairwise distinct.
    """
    n = len(q)
    base = initial_priorities(n)
    return [
        previous[i] + 1.0 if q[i] != goals[i] else base[i] for i in range(n)
    ]


@dataclass
class StepRequest:
    """Input to :func:`plan_step`: the current configuration plus pins."""

    q_from: Config
    pins: dict[int, int] = field(default_factory=dict)


class PibtContext:
    """Reusable per-run state for the step generator.

    Holds the graph, per-agent goal distance tables, the dynamic priority
    vector, and the seeded RNG. A context is single-threaded mutable state;
    use one per solver run. Contexts for different runs are independent.
    """

    def __init__(
        self,
        graph: VertexGraph,
        goals: Sequence[int],
        seed: int = 0,
        swap_enabled: bool = True,
        rng: random.Random | None = None,
        priorities: Sequence[float] | None = None,
    ):
        self.graph = graph
        self.goals: Config = tuple(goals)
        self.n = len(self.goals)
        self.rng = rng if rng is not None else random.Random(seed)
        self.swap_enabled = swap_enabled
        if priorities is None:
            self.priorities = initial_priorities(self.n)
        else:
            if len(priorities) != self.n:
                raise ValueError("priorities length must match agent count")
            self.priorities = list(priorities)
        self.dist_tables = [graph.dist_table(g) for g in self.goals]
        # Inheritance chains recurse at most one frame set per agent.
        needed = 3 * self.n + 500
        if sys.getrecursionlimit() < needed:
            sys.setrecursionlimit(needed)
        # Optional externally maintained processing order; when set it must
        # equal the descending-priority order and is used as-is.
        self.order: Sequence[int] | None = None
        self._adjacency = graph.adjacency
        # Scratch reused across calls: vertex -> agent occupancy maps.
        self._occupied_from = [_NO_AGENT] * graph.num_vertices
        self._occupied_to = [_NO_AGENT] * graph.num_vertices


def update_priorities(ctx: PibtContext, q: Config) -> None:
    """Bump the context's priorities after the agents reached ``q``."""
    ctx.priorities = bumped_priorities(ctx.priorities, q, ctx.goals)


def pin_problem(graph: VertexGraph, q_from: Config, pins: dict[int, int]) -> str | None:
    """Why the pins are malformed, or None if they are acceptable."""
    if not pins:
        return None
    n = len(q_from)
    adjacency = graph.adjacency
    targets: dict[int, int] = {}
    at: dict[int, int] = {}
    for agent, v in pins.items():
        if not 0 <= agent < n:
            return f"pin names unknown agent {agent}"
        here = q_from[agent]
        if v != here and v not in adjacency[here]:
            return f"pin for agent {agent} is outside its neighborhood"
        if v in targets:
            return f"agents {targets[v]} and {agent} pinned to one vertex"
        targets[v] = agent
        at[here] = agent
    for agent, v in pins.items():
        other = at.get(v)
        if other is not None and other != agent and pins[other] == q_from[agent]:
            return f"agents {agent} and {other} pinned to exchange vertices"
    return None


def plan_step(ctx: PibtContext, request: StepRequest) -> Config | None:
    """Compute one connected successor configuration, or None on failure.

    Pinned agents receive exactly their pinned vertex. Remaining agents are
    assigned in descending priority order; per agent, candidates are its
    neighbors plus staying put, sorted by distance to its goal with ties
    broken by a seeded shuffle. Failure (None) occurs only when the pins
    leave some agent without any legal assignment. Malformed pins raise
    :class:`PinError` instead.
    """
    q_from = request.q_from
    if len(q_from) != ctx.n:
        raise ValueError("configuration length does not match context")
    problem = pin_problem(ctx.graph, q_from, request.pins)
    if problem is not None:
        raise PinError(problem)

    graph = ctx.graph
    adjacency = ctx._adjacency
    rng = ctx.rng
    occ_from = ctx._occupied_from
    occ_to = ctx._occupied_to
    q_to: list[int] = [_UNDECIDED] * ctx.n
    touched_to: list[int] = []

    for i, v in enumerate(q_from):
        occ_from[v] = i
    for agent, v in request.pins.items():
        q_to[agent] = v
        occ_to[v] = agent
        touched_to.append(v)

    def reserve(v: int, agent: int) -> None:
        occ_to[v] = agent
        touched_to.append(v)

    def assign(i: int) -> bool:
        """Plan agent ``i``; returns False if it had to stay put blocked."""
        here = q_from[i]
        dist = ctx.dist_tables[i].dist
        big = graph.num_vertices + 1
        cand = [*adjacency[here], here]
        rng.shuffle(cand)
        cand.sort(key=lambda u: dist[u] if dist[u] != UNREACHABLE else big)

        partner = _NO_AGENT
        if ctx.swap_enabled:
            partner_or_none = swap_required_and_possible(
                ctx, i, q_from, cand[0], occ_from
            )
            if partner_or_none is None:
                partner_or_none = _clear_target(ctx, i, q_from, cand[0], occ_from)
            if partner_or_none is not None:
                partner = partner_or_none
                cand.reverse()
        head = cand[0]

        for v in cand:
            if occ_to[v] != _NO_AGENT:
                continue
            k = occ_from[v]
            if k != _NO_AGENT and k != i and q_to[k] == here:
                continue  # the agent leaving v would be exchanged with i
            reserve(v, i)
            q_to[i] = v
            if k != _NO_AGENT and k != i and q_to[k] == _UNDECIDED:
                if not assign(k):
                    # k ended up staying on v; our reservation was replaced.
                    continue
            if v == head and partner != _NO_AGENT and q_to[partner] == _UNDECIDED:
                _pull(partner, here)
            return True
        q_to[i] = here
        reserve(here, i)
        return False

    def _pull(agent: int, target: int) -> None:
        """Pull ``agent`` onto the vertex just vacated, if that stays legal."""
        if occ_to[target] != _NO_AGENT:
            return
        k = occ_from[target]
        if k != _NO_AGENT and k != agent and q_to[k] == q_from[agent]:
            return
        q_to[agent] = target
        reserve(target, agent)

    if ctx.order is not None:
        order = ctx.order
    else:
        order = sorted(range(ctx.n), key=lambda i: -ctx.priorities[i])
    for i in order:
        if q_to[i] == _UNDECIDED:
            assign(i)

    # Pins can force an agent into an unresolvable stay; reject such outputs.
    # Adjacency holds by construction, so only collisions need re-checking:
    # an agent whose final vertex is owned by someone else in the occupancy
    # map was overwritten, i.e. two agents share a vertex.
    ok = True
    for i in range(ctx.n):
        v = q_to[i]
        if v == _UNDECIDED or occ_to[v] != i:
            ok = False
            break
        if v != q_from[i]:
            k = occ_from[v]
            if k != _NO_AGENT and k != i and q_to[k] == q_from[i]:
                ok = False
                break

    result = tuple(q_to)
    for v in q_from:
        occ_from[v] = _NO_AGENT
    for v in touched_to:
        occ_to[v] = _NO_AGENT

    if not ok:
        return None
    for agent, v in request.pins.items():
        if result[agent] != v:
            return None
    return result


def _best_step_toward(graph: VertexGraph, v: int, goal: int) -> int | None:
    """Neighbor of ``v`` strictly closer to ``goal``; ties break by vertex id."""
    table = graph.dist_table(goal)
    here = table[v]
    if here == UNREACHABLE:
        return None
    best: int | None = None
    best_d = here
    for u in graph.neighbors(v):
        d = table[u]
        if d == UNREACHABLE or d >= here:
            continue
        if d < best_d or (d == best_d and best is not None and u < best):
            best, best_d = u, d
    return best


def _swap_required(
    ctx: PibtContext,
    pusher_goal: int,
    retreater_goal: int,
    v_pusher: int,
    v_retreater: int,
) -> bool:
    """Emulate the pusher advancing into the retreater's cell.

    The retreater always backs off to its best cell other than the pusher's,
    ignoring all other agents. The swap is required if the retreater gets
    cornered in a dead end, or if the pusher arrives at its goal while the
    retreater's only improving move is through that goal. It is not required
    once the retreater reaches a vertex of degree above two. The walk is
    bounded by the vertex count; running out of budget counts as no.
    """
    graph = ctx.graph
    adjacency = graph.adjacency
    table = graph.dist_table(retreater_goal).dist
    big = graph.num_vertices + 1
    for _ in range(graph.num_vertices):
        row = adjacency[v_retreater]
        deg = len(row)
        if deg == 1:
            return True
        if v_pusher == pusher_goal:
            return _best_step_toward(graph, v_retreater, retreater_goal) == pusher_goal
        if deg > 2:
            return False
        cells = [u for u in row if u != v_pusher]
        if not cells:
            return True
        step = min(cells, key=lambda u: (table[u] if table[u] != UNREACHABLE else big, u))
        v_pusher, v_retreater = v_retreater, step
    return False


def _swap_possible(
    ctx: PibtContext, retreater_goal: int, v_advancer: int, v_retreater: int
) -> bool:
    """Emulate the reversed direction: the retreater backs away instead.

    Possible once the retreater stands on a vertex of degree above two
    (room to rotate); impossible if it hits a dead end. Bounded like
    :func:`_swap_required`.
    """
    graph = ctx.graph
    adjacency = graph.adjacency
    table = graph.dist_table(retreater_goal).dist
    big = graph.num_vertices + 1
    for _ in range(graph.num_vertices):
        row = adjacency[v_retreater]
        deg = len(row)
        if deg > 2:
            return True
        if deg == 1:
            return False
        cells = [u for u in row if u != v_advancer]
        if not cells:
            return False
        step = min(cells, key=lambda u: (table[u] if table[u] != UNREACHABLE else big, u))
        v_advancer, v_retreater = v_retreater, step
    return False


def swap_required_and_possible(
    ctx: PibtContext,
    i: int,
    q_from: Config,
    best_candidate: int,
    occupied_from: Sequence[int] | None = None,
) -> int | None:
    """Agent to swap with when ``i``'s best move is blocked head-on, else None.

    Fires only when another agent sits on ``i``'s best candidate vertex and
    that vertex has degree two or less. Both emulations must agree: the swap
    is required (first emulation) and possible (second, reversed emulation).
    """
    if best_candidate == q_from[i]:
        return None
    if occupied_from is not None:
        j = occupied_from[best_candidate]
        if j == _NO_AGENT:
            return None
    else:
        try:
            j = q_from.index(best_candidate)
        except ValueError:
            return None
    if j == i:
        return None
    if len(ctx._adjacency[best_candidate]) > 2:
        return None
    gi, gj = ctx.goals[i], ctx.goals[j]
    if _swap_required(ctx, gi, gj, q_from[i], q_from[j]) and _swap_possible(
        ctx, gi, q_from[j], q_from[i]
    ):
        return j
    return None


def _clear_target(
    ctx: PibtContext,
    i: int,
    q_from: Config,
    best_candidate: int,
    occupied_from: Sequence[int],
) -> int | None:
    """Detect an agent behind ``i`` whose swap with ``i`` is pending.

    Covers the junction-clearing pattern: some neighbor agent k wants to
    travel through ``i``'s cell and beyond, so the two emulations are run
    one step ahead, as if k already stood on ``i``'s cell and ``i`` on its
    best candidate. A hit makes ``i`` retreat exactly like a direct swap.
    """
    here = q_from[i]
    if best_candidate == here:
        return None
    gi = ctx.goals[i]
    for u in ctx._adjacency[here]:
        k = occupied_from[u]
        if k == _NO_AGENT or k == i:
            continue
        if q_from[k] == best_candidate:
            continue
        gk = ctx.goals[k]
        if _swap_required(ctx, gk, gi, here, best_candidate) and _swap_possible(
            ctx, gk, best_candidate, here
        ):
            return k
    return None
