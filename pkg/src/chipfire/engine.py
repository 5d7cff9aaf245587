"""Firing semantics, executions and convergence checks for all game kinds."""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass
from typing import Callable

from .errors import BudgetExceeded, NotFireable, Undecided, UnknownVertex
from .model import Configuration, EdgeMultiset, Game, GameState, state_key

Policy = Callable[[GameState, list[str]], str]


@dataclass(frozen=True)
class FiringRecord:
    """An execution: the vertices fired, in order, and the final chips."""

    sequence: tuple[str, ...]
    final: Configuration

    def fire_counts(self) -> Counter:
        return Counter(self.sequence)


def initial_state(game: Game) -> GameState:
    return GameState(dict(game.initial), {v: 0 for v in game.graph.vertices})


def current_out_edges(game: Game, state: GameState, v: str) -> EdgeMultiset:
    """The out-edge multiset of v in the support graph of this state."""
    if game.kind == "mcfg":
        assert game.mutations is not None
        return game.mutations.entry(v, state.fire_counts.get(v, 0))
    return game.graph.out_edges(v)


def fireable(game: Game, state: GameState, v: str) -> bool:
    """A vertex fires only if it is not the sink, has at least one
    outgoing edge, and holds at least outdegree-many chips."""
    if v not in game.graph.vertices:
        raise UnknownVertex(v)
    if v == game.graph.sink:
        return False
    edges = current_out_edges(game, state, v)
    deg = sum(edges.values())
    return deg >= 1 and state.config[v] >= deg


def fireable_vertices(game: Game, state: GameState) -> list[str]:
    return [v for v in game.vertex_order if fireable(game, state, v)]


def fire(game: Game, state: GameState, v: str) -> GameState:
    """Send one chip along each current out-edge of v.

    Loop edges return their chips to v in the same step. For a mutating
    game the bump of v's fire count selects its next edge multiset.
    """
    if not fireable(game, state, v):
        raise NotFireable(f"vertex {v!r} is not fireable")
    edges = current_out_edges(game, state, v)
    config = dict(state.config)
    config[v] -= sum(edges.values())
    for w, m in edges.items():
        config[w] += m
    counts = dict(state.fire_counts)
    counts[v] += 1
    return GameState(config, counts)


def default_step_budget(game: Game) -> int:
    return 10 * max(1, len(game.graph.vertices)) * (game.total_chips() + 1)


def lex_policy(state: GameState, candidates: list[str]) -> str:
    return candidates[0]


def random_policy(seed: int) -> Policy:
    rng = random.Random(seed)
    return lambda state, candidates: rng.choice(candidates)


def _resolve_policy(policy) -> Policy:
    if policy == "lex" or policy is None:
        return lex_policy
    if isinstance(policy, str) and policy.startswith("random"):
        _, _, seed = policy.partition(":")
        return random_policy(int(seed) if seed else 0)
    if callable(policy):
        return policy
    raise ValueError(f"unknown policy {policy!r}")


def run_to_fixpoint(game: Game, policy="lex", step_budget: int | None = None) -> FiringRecord:
    """Fire until nothing is fireable, choosing vertices per the policy.

    For convergent games the final configuration does not depend on the
    policy; the default fires the lexicographically smallest candidate
    so that runs are reproducible.
    """
    pick = _resolve_policy(policy)
    budget = default_step_budget(game) if step_budget is None else step_budget
    state = initial_state(game)
    sequence: list[str] = []
    while True:
        candidates = fireable_vertices(game, state)
        if not candidates:
            return FiringRecord(tuple(sequence), dict(state.config))
        if len(sequence) >= budget:
            raise BudgetExceeded(budget)
        v = pick(state, candidates)
        state = fire(game, state, v)
        sequence.append(v)


def _dynamics_key(game: Game, state: GameState) -> tuple:
    """State identity as far as future behaviour is concerned.

    Static graphs depend only on the chips; mutating ones also on fire
    counts, clamped at the point where the schedule goes stationary.
    """
    order = game.vertex_order
    config = tuple(state.config[v] for v in order)
    if game.kind != "mcfg":
        return config
    assert game.mutations is not None
    counts = tuple(min(state.fire_counts[v], game.mutations.length(v) - 1)
                   for v in order)
    return config + counts


def _sink_reachable_from_all(game: Game) -> bool:
    """Sufficient condition for convergence of static-graph games: some
    vertex with no outgoing edges is reachable from every vertex."""
    g = game.graph
    sinks = [v for v in g.vertices if g.out_degree(v) == 0]
    if not sinks:
        return False
    reached = set(sinks)
    queue = deque(sinks)
    while queue:
        v = queue.popleft()
        for u in g.predecessors(v):
            if u not in reached:
                reached.add(u)
                queue.append(u)
    return reached == set(g.vertices)


def is_convergent(game: Game, step_budget: int | None = None) -> bool:
    """Decide whether the game reaches a fixed point.

    Returns False only on a sound certificate: a dynamics state repeated
    along a maximal play, which lets the play run forever. When neither
    a fixpoint nor a repeat shows up within the budget, raises Undecided.
    """
    if game.kind in ("cfg", "asm") and _sink_reachable_from_all(game):
        return True
    budget = default_step_budget(game) if step_budget is None else step_budget
    state = initial_state(game)
    seen = {_dynamics_key(game, state)}
    for _ in range(budget):
        candidates = fireable_vertices(game, state)
        if not candidates:
            return True
        state = fire(game, state, candidates[0])
        key = _dynamics_key(game, state)
        if key in seen:
            return False
        seen.add(key)
    if not fireable_vertices(game, state):
        return True
    raise Undecided(budget)


def is_simple(game: Game, step_budget: int | None = None) -> bool:
    """True when one complete execution fires every vertex at most once.

    Fire counts are invariant across executions of a convergent game, so
    a single run decides it.
    """
    record = run_to_fixpoint(game, step_budget=step_budget)
    counts = record.fire_counts()
    return all(c <= 1 for c in counts.values())


def chips_needed(game: Game, v: str) -> int:
    """Chips missing before v can fire for the first time: zero when the
    initial chips already cover the initial outdegree."""
    if v not in game.graph.vertices:
        raise UnknownVertex(v)
    return max(0, game.graph.out_degree(v) - game.initial[v])
