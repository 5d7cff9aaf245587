"""Space-preserving game rewrites.

Grounding and multiplying adjust a vertex without touching the order of
its configuration space; the directed-to-undirected construction chains
them to reverse every non-sink edge; vertex splitting trades one firing
of a mutating vertex for alternating firings of two fresh vertices; and
the mutation-freezing rewrite turns a simple mutating game into a plain
one. Every public operation preserves the configuration space up to
isomorphism on its stated preconditions, which the test suite checks
directly.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

from . import engine, space as space_mod
from .errors import (
    CyclicSupport,
    InternalInconsistency,
    IterationBudget,
    MissingSink,
    MultipleSinks,
    NonConvergent,
    NotMCFG,
    NotSimple,
    UnfiredVertex,
    UnknownVertex,
    VertexFiredOnce,
    WrongKind,
)
from .model import EdgeMultiset, Game, MultiGraph, MutationSchedule, cfg


def _require_cfg_vertex(game: Game, v: str) -> None:
    if game.kind != "cfg":
        raise WrongKind(f"expected a cfg, got {game.kind!r}")
    if v not in game.graph.vertices:
        raise UnknownVertex(v)
    if v == game.graph.sink:
        raise UnknownVertex(v)


def _require_simple(game: Game) -> None:
    if not engine.is_simple(game):
        raise NotSimple("some vertex fires more than once")


def _with_edges(game: Game, chips: Mapping[str, int],
                edges: Mapping[tuple[str, str], int]) -> Game:
    graph = MultiGraph(game.graph.vertices, dict(edges), game.graph.sink)
    return Game(graph, dict(chips), "cfg")


def _ground_raw(game: Game, v: str, n: int) -> Game:
    if n == 0:
        return game
    sink = game.graph.sink
    if sink is None:
        raise MissingSink("grounding adds edges to the sink")
    chips = dict(game.initial)
    chips[v] += n
    edges = dict(game.graph.edges)
    edges[(v, sink)] = edges.get((v, sink), 0) + n
    return _with_edges(game, chips, edges)


def _multiply_raw(game: Game, v: str, n: int) -> Game:
    if n == 1:
        return game
    sink = game.graph.sink
    if sink is None:
        raise MissingSink("multiplying adds edges to the sink")
    chips = dict(game.initial)
    edges = dict(game.graph.edges)
    out_deg = game.graph.out_degree(v)
    chips[v] *= n
    if out_deg:
        edges[(v, sink)] = edges.get((v, sink), 0) + (n - 1) * out_deg
    for u in game.graph.predecessors(v):
        extra = (n - 1) * game.graph.multiplicity(u, v)
        edges[(u, v)] += extra
        chips[u] += extra
    return _with_edges(game, chips, edges)


def ground(game: Game, v: str, n: int) -> Game:
    """Add n chips on v and n edges from v to the sink.

    On a simple game this preserves the configuration space: v needs the
    same chips to fire and sheds the surplus into the sink.
    """
    _require_cfg_vertex(game, v)
    if n < 0:
        raise ValueError("grounding factor must be >= 0")
    _require_simple(game)
    return _ground_raw(game, v, n)


def multiply(game: Game, v: str, n: int) -> Game:
    """Scale v's initial chips and indegree by n, grounding the excess.

    Every predecessor u gains (n-1) d(u,v) parallel edges into v plus as
    many chips, and v gains (n-1) d+(v) edges to the sink, so v still
    fires exactly once and its first times are unchanged.
    """
    _require_cfg_vertex(game, v)
    if n < 1:
        raise ValueError("multiplying factor must be >= 1")
    _require_simple(game)
    return _multiply_raw(game, v, n)


def deficit_table(game: Game,
                  state_budget: int = space_mod.DEFAULT_STATE_BUDGET) -> dict[str, int]:
    """Largest chip deficit d+(v) - chips(v) over the whole space, per
    non-sink vertex. At the fixpoint every fired vertex still lacks at
    least one chip, so values are >= 1 for fired vertices."""
    if game.kind != "cfg":
        raise WrongKind(f"expected a cfg, got {game.kind!r}")
    _require_simple(game)
    sp = space_mod.build_space(game, state_budget)
    sink = game.graph.sink
    table: dict[str, int] = {}
    for v in game.vertex_order:
        if v == sink:
            continue
        deg = game.graph.out_degree(v)
        table[v] = max(deg - s.config[v] for s in sp.states)
    return table


def _min_unfired_deficit(sp: space_mod.ConfigSpace) -> dict[str, int | None]:
    """Per vertex, the smallest positive chip deficit over states where
    the vertex has not fired yet; None when it is fireable in every such
    state. This is the quantity the edge-reversal preparation scales: a
    gap-free vertex can absorb extra incoming edges without its first
    times moving."""
    game = sp.game
    sink = game.graph.sink
    out: dict[str, int | None] = {}
    for v in game.vertex_order:
        if v == sink:
            continue
        deg = game.graph.out_degree(v)
        best: int | None = None
        for s in sp.states:
            if s.fire_counts[v]:
                continue
            gap = deg - s.config[v]
            if gap >= 1 and (best is None or gap < best):
                best = gap
        out[v] = best
    return out


def _find_cycle(game: Game) -> list[str] | None:
    """A directed cycle among non-sink vertices, or None."""
    sink = game.graph.sink
    colour: dict[str, int] = {}
    stack: list[str] = []

    def visit(v: str) -> list[str] | None:
        colour[v] = 1
        stack.append(v)
        for w in game.graph.successors(v):
            if w == sink:
                continue
            c = colour.get(w, 0)
            if c == 1:
                return stack[stack.index(w):]
            if c == 0:
                found = visit(w)
                if found is not None:
                    return found
        stack.pop()
        colour[v] = 2
        return None

    for v in game.vertex_order:
        if v != sink and colour.get(v, 0) == 0:
            found = visit(v)
            if found is not None:
                return found
    return None


def _reverse_topological(game: Game) -> list[str]:
    """Non-sink vertices ordered so that each appears after all of its
    successors; ties broken lexicographically."""
    sink = game.graph.sink
    marked = {sink}
    out: list[str] = []
    remaining = [v for v in game.vertex_order if v != sink]
    while remaining:
        for v in remaining:
            if all(w in marked for w in game.graph.successors(v)):
                marked.add(v)
                out.append(v)
                remaining.remove(v)
                break
        else:
            raise InternalInconsistency("no vertex with all successors marked")
    return out


def _assert_gap_free(game: Game, state_budget: int) -> None:
    """Every vertex that has not fired and cannot fire lacks strictly
    more chips than its non-sink outdegree; extra reversed edges then
    cannot enable an early firing."""
    sp = space_mod.build_space(game, state_budget)
    for v in game.vertex_order:
        if v == game.graph.sink:
            continue
        deg = game.graph.out_degree(v)
        d = game.graph.non_sink_out_degree(v)
        for s in sp.states:
            if s.fire_counts[v]:
                continue
            gap = deg - s.config[v]
            if 1 <= gap <= d:
                raise InternalInconsistency(
                    f"vertex {v!r} sits {gap} chips short with non-sink "
                    f"outdegree {d} after the multiplying pass")


def cfg_to_asm(game: Game, *, verify: bool = False,
               state_budget: int = space_mod.DEFAULT_STATE_BUDGET) -> Game:
    """Rewrite an acyclic simple game into an equivalent sandpile.

    Three passes over the vertices in reverse topological order:

    1. multiply any vertex whose smallest positive not-yet-fired deficit
       does not exceed its non-sink outdegree, so that reversed edges
       cannot change its first firing times;
    2. ground any vertex that could fire twice once it also receives the
       reversed flow, until chips + indegree + non-sink outdegree stay
       below twice the outdegree;
    3. add the reverse of every pre-existing non-sink edge, with one
       compensating chip at the tail of each new edge.

    The result has d(u,v) = d(v,u) away from the sink and one-way sink
    edges, hence is a sandpile, and its configuration space is
    isomorphic to the input's. With ``verify=True`` the pass-1 and
    pass-2 postconditions are re-checked against freshly built spaces.
    """
    if game.kind != "cfg":
        raise WrongKind(f"expected a cfg, got {game.kind!r}")
    sink = game.graph.sink
    if sink is None:
        raise MissingSink("the sandpile construction needs a designated sink")
    dead = [v for v in game.vertex_order if game.graph.out_degree(v) == 0]
    if dead != [sink]:
        raise MultipleSinks(dead)
    cycle = _find_cycle(game)
    if cycle is not None:
        raise CyclicSupport(cycle)

    sp = space_mod.build_space(game, state_budget)
    if not sp.simple:
        raise NotSimple("some vertex fires more than once")
    final_counts = sp.states[sp.top].fire_counts
    for v in game.vertex_order:
        if v != sink and final_counts[v] == 0:
            raise UnfiredVertex(v)

    gaps = _min_unfired_deficit(sp)

    # Pass 1: multiplying. Processing follows reverse topological order,
    # so a vertex's non-sink outdegree is final when its turn comes, and
    # its own gap is exactly scaled by its own multiplication.
    current = game
    for v in _reverse_topological(game):
        gap = gaps[v]
        d = current.graph.non_sink_out_degree(v)
        if gap is not None and gap <= d:
            factor = math.ceil((d + 1) / gap)
            current = _multiply_raw(current, v, factor)
            gaps[v] = gap * factor
    if verify:
        _assert_gap_free(current, state_budget)

    # Pass 2: grounding until no vertex can fire twice after reversal.
    for v in current.vertex_order:
        if v == sink:
            continue
        while True:
            chips0 = current.initial[v]
            deg = current.graph.out_degree(v)
            indeg = current.graph.in_degree(v)
            d = current.graph.non_sink_out_degree(v)
            if chips0 + indeg + d < 2 * deg:
                break
            denom = 2 * deg - chips0
            if denom <= 0:
                raise InternalInconsistency(
                    f"grounding factor for {v!r} undefined: 2 d+ <= chips; "
                    "simplicity should rule this out")
            factor = math.ceil((d + indeg + 1) / denom)
            current = _ground_raw(current, v, max(1, factor))

    # Pass 3: reverse every pre-existing non-sink edge, compensating the
    # tail of each new edge with one chip.
    chips = dict(current.initial)
    edges = dict(current.graph.edges)
    for (u, v), m in list(current.graph.edges.items()):
        if v == sink:
            continue
        edges[(v, u)] = edges.get((v, u), 0) + m
        chips[v] += m

    graph = MultiGraph(current.graph.vertices, edges, sink)
    result = Game(graph, chips, "asm")

    from .model import validate

    problems = validate(result)
    if problems:
        raise InternalInconsistency(
            "edge reversal produced an invalid sandpile: "
            + "; ".join(map(str, problems)))
    return result


# ---------------------------------------------------------------------------
# Mutating-game rewrites


def _doubled_multiset(entry: EdgeMultiset, a: str, a0: str, a1: str) -> EdgeMultiset:
    """Entry of an unsplit vertex: double everything, route former edges
    to the split vertex half and half."""
    out: EdgeMultiset = {}
    for w, m in entry.items():
        if w == a:
            out[a0] = out.get(a0, 0) + m
            out[a1] = out.get(a1, 0) + m
        else:
            out[w] = out.get(w, 0) + 2 * m
    return out


def _split_half_multiset(entry: EdgeMultiset, a: str, half: str, other: str,
                         big: int) -> EdgeMultiset:
    """Entry of one half of the split vertex, built from one of a's
    entries: non-loop targets doubled, loops kept on this half, plus a
    bundle of ``big`` minus a's non-loop outdegree edges to the other
    half, which forces the halves to fire alternately.

    An empty entry stays empty: a vertex with no outgoing edges can
    never fire again, and its half must be equally dead, so it gets no
    alternation bundle. A bundle clamped at zero can only happen when
    the entry's outdegree exceeds the chips in play, which leaves both
    the original vertex and the half unfireable anyway.
    """
    if not entry:
        return {}
    out: EdgeMultiset = {}
    non_loop = sum(m for w, m in entry.items() if w != a)
    for w, m in entry.items():
        if w == a:
            out[half] = out.get(half, 0) + m
        else:
            out[w] = out.get(w, 0) + 2 * m
    coupling = max(0, big - non_loop)
    if coupling:
        out[other] = out.get(other, 0) + coupling
    return out


def mcfg_split_vertex(game: Game, a: str,
                      step_budget: int | None = None) -> Game:
    """Split a vertex that fires at least twice into two alternating halves.

    Every other vertex is doubled (chips and edge occurrences), with
    occurrences of the split vertex replaced by one edge to each half.
    The halves take the even- and odd-indexed entries of the original
    schedule; mutual bundles sized against twice the total chips in the
    game make them fire strictly in turn. The result is equivalent to
    the doubled game, hence to the original.
    """
    if game.kind != "mcfg":
        raise NotMCFG(f"expected an mcfg, got {game.kind!r}")
    if a not in game.graph.vertices:
        raise UnknownVertex(a)
    if not engine.is_convergent(game, step_budget):
        raise NonConvergent("splitting requires a convergent game")
    record = engine.run_to_fixpoint(game, step_budget=step_budget)
    fired = record.fire_counts()[a]
    if fired < 2:
        raise VertexFiredOnce(a, fired)

    assert game.mutations is not None
    sched = game.mutations
    a0, a1 = f"{a}#0", f"{a}#1"
    if a0 in game.graph.vertices or a1 in game.graph.vertices:
        raise ValueError(f"split names {a0!r}/{a1!r} already taken")

    big = 2 * game.total_chips()
    entries: dict[str, tuple[EdgeMultiset, ...]] = {}
    for v in game.graph.vertices:
        if v == a:
            continue
        entries[v] = tuple(_doubled_multiset(e, a, a0, a1)
                           for e in sched.entries[v])

    length = len(sched.entries[a])
    half_len = length // 2 + 1
    entries[a0] = tuple(
        _split_half_multiset(sched.entry(a, 2 * i), a, a0, a1, big)
        for i in range(half_len))
    entries[a1] = tuple(
        _split_half_multiset(sched.entry(a, 2 * i + 1), a, a1, a0, big)
        for i in range(half_len))

    chips = {v: 2 * c for v, c in game.initial.items() if v != a}
    chips[a0] = game.initial[a] + big
    chips[a1] = game.initial[a]

    vertices = frozenset(chips)
    edge_map: dict[tuple[str, str], int] = {}
    for v in vertices:
        for w, m in entries[v][0].items():
            edge_map[(v, w)] = m
    graph = MultiGraph(vertices, edge_map, game.graph.sink)
    return Game(graph, chips, "mcfg", MutationSchedule(entries))


def mcfg_simplify(game: Game, max_splits: int = 16,
                  step_budget: int | None = None) -> Game:
    """Split maximal-fire-count vertices until every vertex fires at
    most once. Each split roughly doubles the game, so rounds are capped."""
    if game.kind != "mcfg":
        raise NotMCFG(f"expected an mcfg, got {game.kind!r}")
    current = game
    for _ in range(max_splits):
        record = engine.run_to_fixpoint(current, step_budget=step_budget)
        counts = record.fire_counts()
        if not counts or max(counts.values()) <= 1:
            return current
        worst = max(counts.values())
        target = min(v for v, c in counts.items() if c == worst)
        current = mcfg_split_vertex(current, target, step_budget)
    raise IterationBudget(f"not simple after {max_splits} splits")


def mcfg_to_cfg(game: Game, step_budget: int | None = None) -> Game:
    """Freeze a simple convergent mutating game into a plain one.

    A vertex whose final chips reach its initial outdegree gets enough
    sink edges to raise that outdegree past the final chips, and its
    initial chips are reset so that it still needs the same number of
    chips to fire for the first time. After those rewrites no mutation
    can ever matter, so all schedules are dropped. A game without a
    designated sink gains a fresh isolated one when some vertex needs
    the rewrite; an isolated absorber leaves the space unchanged.
    """
    if game.kind != "mcfg":
        raise NotMCFG(f"expected an mcfg, got {game.kind!r}")
    if not engine.is_convergent(game, step_budget):
        raise NonConvergent("freezing requires a convergent game")
    record = engine.run_to_fixpoint(game, step_budget=step_budget)
    if any(c > 1 for c in record.fire_counts().values()):
        raise NotSimple("some vertex fires more than once; split it first")

    sink = game.graph.sink
    vertices = set(game.graph.vertices)
    chips = dict(game.initial)
    edges = dict(game.graph.edges)
    for w in game.vertex_order:
        if w == sink:
            continue
        deg0 = game.graph.out_degree(w)
        final = record.final[w]
        if final < deg0:
            continue
        if sink is None:
            from .model import _fresh_name

            sink = _fresh_name("bot", frozenset(vertices))
            vertices.add(sink)
            chips[sink] = 0
        needed = engine.chips_needed(game, w)
        edges[(w, sink)] = edges.get((w, sink), 0) + (final + 1 - deg0)
        chips[w] = final + 1 - needed
    graph = MultiGraph(frozenset(vertices), edges, sink)
    return Game(graph, chips, "cfg")
