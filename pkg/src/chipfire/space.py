"""Exhaustive construction of a game's configuration space.

States are explored breadth first from the initial configuration and
deduplicated by (chips, fire counts); every firing is a cover edge of
the reachability order, labelled by the fired vertex. Since each firing
raises the total fire count by exactly one, the order is graded and
single firings can never coincide with multi-step paths.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

from . import engine
from .errors import BudgetExceeded, InternalInconsistency, NotSimple
from .lattice import FinitePoset
from .model import Game, GameState, state_key

DEFAULT_STATE_BUDGET = 1_000_000


@dataclass
class ConfigSpace:
    """All reachable states of a game with labelled cover edges.

    ``covers`` holds triples (i, v, j): firing v in state i yields state
    j. ``shot_sets`` is present exactly when the game is simple; then
    state j extends state i's shot-set by the fired vertex and the order
    is isomorphic to shot-set inclusion.
    """

    game: Game
    states: list[GameState]
    covers: list[tuple[int, str, int]]
    top: int
    simple: bool
    shot_sets: list[frozenset[str]] | None
    root: int = 0
    _index: dict[tuple, int] = field(repr=False, default_factory=dict)
    _poset: FinitePoset | None = field(repr=False, default=None)
    _by_shotset: dict[frozenset[str], int] | None = field(repr=False, default=None)

    def __len__(self) -> int:
        return len(self.states)

    def index_of(self, state: GameState) -> int:
        key = state_key(self.game.vertex_order, state)
        try:
            return self._index[key]
        except KeyError:
            raise ValueError("state is not part of this configuration space")

    def poset(self) -> FinitePoset:
        if self._poset is None:
            pairs = sorted({(i, j) for i, _v, j in self.covers})
            self._poset = FinitePoset(tuple(range(len(self.states))), pairs)
        return self._poset

    def state_by_shotset(self, shots: frozenset[str]) -> int | None:
        if self.shot_sets is None:
            raise NotSimple("shot-sets exist only for simple games")
        if self._by_shotset is None:
            self._by_shotset = {s: i for i, s in enumerate(self.shot_sets)}
        return self._by_shotset.get(shots)


def build_space(game: Game, state_budget: int = DEFAULT_STATE_BUDGET) -> ConfigSpace:
    """Breadth-first closure of the firing relation from the initial state."""
    order = game.vertex_order
    root = engine.initial_state(game)
    states = [root]
    index = {state_key(order, root): 0}
    covers: list[tuple[int, str, int]] = []
    top: int | None = None

    queue = deque([0])
    while queue:
        i = queue.popleft()
        state = states[i]
        candidates = engine.fireable_vertices(game, state)
        if not candidates:
            if top is not None and top != i:
                raise InternalInconsistency(
                    "two distinct fixpoints reached; the game is not convergent")
            top = i
            continue
        for v in candidates:
            nxt = engine.fire(game, state, v)
            key = state_key(order, nxt)
            j = index.get(key)
            if j is None:
                if len(states) >= state_budget:
                    raise BudgetExceeded(state_budget, "states")
                j = len(states)
                index[key] = j
                states.append(nxt)
                queue.append(j)
            covers.append((i, v, j))

    if top is None:
        raise InternalInconsistency("no fixpoint found in a finite space")

    simple = all(c <= 1 for s in states for c in s.fire_counts.values())
    shot_sets = [s.shot_set() for s in states] if simple else None
    covers.sort()
    return ConfigSpace(game=game, states=states, covers=covers, top=top,
                       simple=simple, shot_sets=shot_sets, _index=index)


def shot_set(space: ConfigSpace, state: GameState) -> frozenset[str]:
    """Vertices fired to reach the state; well defined for simple games."""
    if not space.simple:
        raise NotSimple("shot-sets exist only for simple games")
    assert space.shot_sets is not None
    return space.shot_sets[space.index_of(state)]


def join_by_shotsets(space: ConfigSpace, a: GameState, b: GameState) -> GameState:
    """The join of two states, located through sh(a v b) = sh(a) u sh(b)."""
    union = shot_set(space, a) | shot_set(space, b)
    idx = space.state_by_shotset(union)
    if idx is None:
        raise InternalInconsistency(
            f"no state carries the shot-set union {sorted(union)}")
    return space.states[idx]


def first_times(space: ConfigSpace, v: str) -> list[frozenset[str]]:
    """Inclusion-minimal shot-sets of states in which v is fireable.

    Empty when v is never fireable anywhere in the space. The result is
    sorted by size then by sorted member names, for stable output.
    """
    if not space.simple:
        raise NotSimple("first times are defined through shot-sets")
    assert space.shot_sets is not None
    hits = [space.shot_sets[i] for i, s in enumerate(space.states)
            if engine.fireable(space.game, s, v)]
    minimal = [x for x in hits if not any(y < x for y in hits)]
    unique = sorted(set(minimal), key=lambda s: (len(s), sorted(s)))
    return unique


def all_first_times(space: ConfigSpace) -> dict[str, list[frozenset[str]]]:
    """first_times for every non-sink vertex of the underlying game."""
    sink = space.game.graph.sink
    return {v: first_times(space, v)
            for v in space.game.vertex_order if v != sink}


def space_from_first_times(vertices: list[str],
                           x: dict[str, list[frozenset[str]]]) -> FinitePoset:
    """Reconstruct the space order from first-times data alone.

    The elements are the subsets Y of ``vertices`` such that every
    member v of Y has some first-times witness contained in Y, ordered
    by inclusion.
    """
    names = sorted(vertices)
    if len(names) > 20:
        raise ValueError("first-times reconstruction enumerates all subsets; "
                         f"{len(names)} vertices is beyond desk scale")
    witness = {v: [frozenset(z) for z in x.get(v, [])] for v in names}
    family: list[frozenset[str]] = []
    for mask in range(1 << len(names)):
        y = frozenset(names[i] for i in range(len(names)) if (mask >> i) & 1)
        if all(any(z <= y for z in witness[v]) for v in y):
            family.append(y)
    family.sort(key=lambda s: (len(s), sorted(s)))
    return FinitePoset.from_leq(family, lambda a, b: a <= b)


def chain_length_extremes(space: ConfigSpace) -> tuple[int, int]:
    """Shortest and longest cover path from the root to the top."""
    n = len(space.states)
    longest = [-1] * n
    shortest = [n + 1] * n
    longest[space.root] = shortest[space.root] = 0
    for i in space.poset()._topo:
        if longest[i] < 0:
            continue
        for j in space.poset().upper_covers(i):
            longest[j] = max(longest[j], longest[i] + 1)
            shortest[j] = min(shortest[j], shortest[i] + 1)
    return shortest[space.top], longest[space.top]


# ---------------------------------------------------------------------------
# Exports


def _config_label(space: ConfigSpace, i: int) -> str:
    state = space.states[i]
    return ",".join(f"{v}:{state.config[v]}" for v in space.game.vertex_order)


def space_to_dot(space: ConfigSpace) -> str:
    """Hasse diagram in DOT, edges labelled by the fired vertex."""
    lines = ["digraph confspace {", "  rankdir=BT;",
             '  node [shape=box, fontsize=10];']
    for i in range(len(space.states)):
        label = _config_label(space, i)
        if space.shot_sets is not None:
            shots = ",".join(sorted(space.shot_sets[i]))
            label += f"\\n{{{shots}}}"
        lines.append(f'  n{i} [label="{label}"];')
    for i, v, j in space.covers:
        lines.append(f'  n{i} -> n{j} [label="{v}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def space_to_dict(space: ConfigSpace) -> dict[str, Any]:
    states = []
    for i, s in enumerate(space.states):
        item: dict[str, Any] = {
            "config": {v: s.config[v] for v in space.game.vertex_order},
            "fire_counts": {v: s.fire_counts[v] for v in space.game.vertex_order},
        }
        if space.shot_sets is not None:
            item["shot_set"] = sorted(space.shot_sets[i])
        states.append(item)
    return {
        "states": states,
        "covers": [[i, v, j] for i, v, j in space.covers],
        "root": space.root,
        "top": space.top,
        "simple": space.simple,
    }
