"""Domain types for games: graphs, configurations, mutation schedules.

Three kinds of games share one representation:

* ``"cfg"``  - chip firing on a directed multigraph.
* ``"asm"``  - sandpile on an undirected graph with a designated sink,
  stored in directed normal form: each undirected edge {u, v} away from
  the sink becomes the pair (u, v), (v, u); an undirected edge {v, sink}
  becomes the single directed edge (v, sink).
* ``"mcfg"`` - chip firing where a vertex swaps its outgoing edge
  multiset after each of its firings, following a per-vertex schedule.

All types are immutable values; operations return new games.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping

from .errors import GameFormatError, NonConvergent, NotAnAsm, WrongKind

KINDS = ("cfg", "asm", "mcfg")

# chips per vertex
Configuration = dict[str, int]
# target vertex -> edge multiplicity
EdgeMultiset = dict[str, int]


def _as_multiset(items: Iterable[str] | Mapping[str, int]) -> EdgeMultiset:
    if isinstance(items, Mapping):
        return {k: int(v) for k, v in items.items() if v}
    out: EdgeMultiset = {}
    for name in items:
        out[name] = out.get(name, 0) + 1
    return out


def _multiset_to_list(ms: Mapping[str, int]) -> list[str]:
    out: list[str] = []
    for name in sorted(ms):
        out.extend([name] * ms[name])
    return out


@dataclass(frozen=True)
class MultiGraph:
    """Directed multigraph with edge multiplicities and an optional sink."""

    vertices: frozenset[str]
    edges: Mapping[tuple[str, str], int]
    sink: str | None = None

    @cached_property
    def vertex_order(self) -> tuple[str, ...]:
        return tuple(sorted(self.vertices))

    @cached_property
    def _out(self) -> dict[str, EdgeMultiset]:
        adj: dict[str, EdgeMultiset] = {v: {} for v in self.vertices}
        for (u, w), m in self.edges.items():
            adj.setdefault(u, {})[w] = adj[u].get(w, 0) + m
        return adj

    @cached_property
    def _in(self) -> dict[str, EdgeMultiset]:
        adj: dict[str, EdgeMultiset] = {v: {} for v in self.vertices}
        for (u, w), m in self.edges.items():
            adj.setdefault(w, {})[u] = adj[w].get(u, 0) + m
        return adj

    def out_edges(self, v: str) -> EdgeMultiset:
        return self._out.get(v, {})

    def out_degree(self, v: str) -> int:
        return sum(self.out_edges(v).values())

    def in_degree(self, v: str) -> int:
        return sum(self._in.get(v, {}).values())

    def sink_degree(self, v: str) -> int:
        """Number of edges from v to the designated sink."""
        if self.sink is None:
            return 0
        return self.edges.get((v, self.sink), 0)

    def non_sink_out_degree(self, v: str) -> int:
        """Outdegree not counting edges into the designated sink."""
        return self.out_degree(v) - self.sink_degree(v)

    def multiplicity(self, u: str, v: str) -> int:
        return self.edges.get((u, v), 0)

    def predecessors(self, v: str) -> list[str]:
        return sorted(self._in.get(v, {}))

    def successors(self, v: str) -> list[str]:
        return sorted(self.out_edges(v))


@dataclass(frozen=True)
class MutationSchedule:
    """Per-vertex edge-set schedules for mutating games.

    ``entries[v]`` is the full schedule: index 0 is the vertex's outgoing
    edge multiset in the initial support graph, index i the multiset it
    receives after its i-th firing. Indexing past the end repeats the
    last entry forever, so a plain chip firing game is the special case
    of a single stationary entry.
    """

    entries: Mapping[str, tuple[EdgeMultiset, ...]]

    def entry(self, v: str, i: int) -> EdgeMultiset:
        lst = self.entries.get(v)
        if not lst:
            return {}
        return lst[min(i, len(lst) - 1)]

    def length(self, v: str) -> int:
        lst = self.entries.get(v)
        return len(lst) if lst else 1

    def loops(self, v: str, i: int) -> int:
        """Occurrences of v in its own entry i."""
        return self.entry(v, i).get(v, 0)

    def out_degree(self, v: str, i: int) -> int:
        return sum(self.entry(v, i).values())

    def non_loop_out_degree(self, v: str, i: int) -> int:
        return self.out_degree(v, i) - self.loops(v, i)


@dataclass(frozen=True)
class Game:
    """A support graph, an initial configuration and a kind tag."""

    graph: MultiGraph
    initial: Configuration
    kind: str
    mutations: MutationSchedule | None = None

    @property
    def vertex_order(self) -> tuple[str, ...]:
        return self.graph.vertex_order

    def total_chips(self) -> int:
        return sum(self.initial.values())


@dataclass(frozen=True, eq=True)
class GameState:
    """Chips per vertex plus how often each vertex has fired so far.

    For a mutating game the pair fully determines the current support
    graph; for the other kinds fire counts are bookkeeping used for
    simplicity detection and shot-sets.
    """

    config: Configuration
    fire_counts: dict[str, int]

    def shot_set(self) -> frozenset[str]:
        return frozenset(v for v, c in self.fire_counts.items() if c)


def state_key(order: tuple[str, ...], state: GameState) -> tuple:
    """Hashable identity of a state: chips and fire counts in vertex order."""
    return (tuple(state.config[v] for v in order),
            tuple(state.fire_counts[v] for v in order))


def _normalize_edges(edges) -> dict[tuple[str, str], int]:
    acc: dict[tuple[str, str], int] = {}
    if isinstance(edges, Mapping):
        items = [(u, v, m) for (u, v), m in edges.items()]
    else:
        items = []
        for e in edges:
            if len(e) == 2:
                items.append((e[0], e[1], 1))
            else:
                items.append((e[0], e[1], int(e[2])))
    for u, v, m in items:
        acc[(u, v)] = acc.get((u, v), 0) + m
    return acc


def cfg(chips: Mapping[str, int], edges, sink: str | None = None) -> Game:
    """Build a chip firing game. ``chips`` defines the vertex set."""
    graph = MultiGraph(frozenset(chips), _normalize_edges(edges), sink)
    return Game(graph, dict(chips), "cfg")


def asm(chips: Mapping[str, int], undirected_edges, sink: str | None) -> Game:
    """Build a sandpile game from undirected edges, listed once each.

    The directed normal form is produced here: symmetric pairs away from
    the sink, one-way edges into it.
    """
    directed: dict[tuple[str, str], int] = {}

    def add(u, v, m):
        directed[(u, v)] = directed.get((u, v), 0) + m

    for (u, v), m in _normalize_edges(undirected_edges).items():
        if sink is not None and v == sink:
            add(u, v, m)
        elif sink is not None and u == sink:
            add(v, u, m)
        elif u == v:
            add(u, v, m)
        else:
            add(u, v, m)
            add(v, u, m)
    graph = MultiGraph(frozenset(chips), directed, sink)
    return Game(graph, dict(chips), "asm")


def mcfg(chips: Mapping[str, int], edges, tails: Mapping[str, Iterable], sink: str | None = None) -> Game:
    """Build a mutating game.

    ``tails[v]`` lists the edge multisets v receives after its first,
    second, ... firing. Entry 0 of every schedule is the vertex's
    outgoing edge multiset in ``edges``; vertices absent from ``tails``
    keep their initial edges forever.
    """
    graph = MultiGraph(frozenset(chips), _normalize_edges(edges), sink)
    entries: dict[str, tuple[EdgeMultiset, ...]] = {}
    for v in graph.vertices:
        sched = [dict(graph.out_edges(v))]
        for entry in tails.get(v, ()):
            sched.append(_as_multiset(entry))
        entries[v] = tuple(sched)
    return Game(graph, dict(chips), "mcfg", MutationSchedule(entries))


# ---------------------------------------------------------------------------
# Structural validation


@dataclass(frozen=True)
class Violation:
    """One structural defect, naming the vertex or edge at fault."""

    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}({self.subject}): {self.message}"


def validate(game: Game) -> list[Violation]:
    """Check every structural invariant; an empty list means all hold."""
    out: list[Violation] = []
    g = game.graph

    def bad(code, subject, message):
        out.append(Violation(code, subject, message))

    if game.kind not in KINDS:
        bad("bad-kind", game.kind, f"kind must be one of {KINDS}")
        return out

    for v in g.vertices:
        if not v:
            bad("empty-name", v, "vertex names must be non-empty")

    for v in g.vertices:
        if v not in game.initial:
            bad("missing-chips", v, "vertex has no chip count")
    for v, c in game.initial.items():
        if v not in g.vertices:
            bad("unknown-chips", v, "chip count for unknown vertex")
        elif c < 0:
            bad("negative-chips", v, f"chip count {c} is negative")

    for (u, v), m in g.edges.items():
        for end in (u, v):
            if end not in g.vertices:
                bad("unknown-endpoint", end, f"edge ({u}, {v}) uses unknown vertex")
        if m < 1:
            bad("bad-multiplicity", f"{u}->{v}", f"multiplicity {m} is below 1")

    if g.sink is not None:
        if g.sink not in g.vertices:
            bad("unknown-sink", g.sink, "designated sink is not a vertex")
        elif g.out_degree(g.sink) > 0:
            bad("sink-out-edge", g.sink, "designated sink has outgoing edges")

    if game.kind == "asm":
        if g.sink is None:
            bad("asm-missing-sink", "", "a sandpile game needs a designated sink")
        seen: set[frozenset[str]] = set()
        for (u, v) in g.edges:
            if g.sink in (u, v) or u == v:
                continue
            pair = frozenset((u, v))
            if pair in seen:
                continue
            seen.add(pair)
            if g.multiplicity(u, v) != g.multiplicity(v, u):
                bad("asm-asymmetric-edge", f"{u}<->{v}",
                    f"d({u},{v})={g.multiplicity(u, v)} but "
                    f"d({v},{u})={g.multiplicity(v, u)}")

    if game.kind == "mcfg":
        if game.mutations is None:
            bad("missing-mutations", "", "mutating game without a schedule")
        else:
            sched = game.mutations
            for v in g.vertices:
                if v not in sched.entries:
                    bad("missing-mutation-entries", v, "vertex has no schedule")
                    continue
                if sched.entries[v][0] != dict(g.out_edges(v)):
                    bad("mutation-entry0-mismatch", v,
                        "schedule entry 0 differs from the initial out-edges")
                for i, entry in enumerate(sched.entries[v]):
                    for w in entry:
                        if w not in g.vertices:
                            bad("unknown-mutation-target", w,
                                f"entry {i} of {v} targets unknown vertex")
    elif game.mutations is not None:
        bad("unexpected-mutations", game.kind,
            "only mutating games carry a schedule")

    return out


# ---------------------------------------------------------------------------
# Kind conversions and normalization


def asm_to_cfg(game: Game) -> Game:
    """Reinterpret a sandpile as a plain chip firing game.

    The stored directed normal form already has one edge pair per
    undirected edge and one-way sink edges, so only the kind changes.
    """
    if game.kind != "asm":
        raise NotAnAsm(f"expected an asm game, got {game.kind!r}")
    problems = validate(game)
    if problems:
        raise NotAnAsm("invalid asm: " + "; ".join(map(str, problems)))
    return Game(game.graph, dict(game.initial), "cfg")


def _fresh_name(base: str, taken: frozenset[str]) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}#{i}" in taken:
        i += 1
    return f"{base}#{i}"


def normalize_cfg(game: Game, step_budget: int | None = None) -> Game:
    """Rewrite a convergent chip firing game into standard form.

    The result has exactly one sink: outgoing edges of never-fired
    vertices are dropped, an isolated sink is added when none exists,
    and multiple sinks are merged. Loops on vertices that fire at most
    once are replaced by edges to the sink. For games where every vertex
    fires at most once this preserves the configuration space up to
    isomorphism; loops on vertices that fire more often are kept, since
    replacing them would change how often the vertex can fire.
    """
    from . import engine

    if game.kind != "cfg":
        raise WrongKind(f"normalize_cfg expects a cfg, got {game.kind!r}")
    if not engine.is_convergent(game, step_budget):
        raise NonConvergent("game does not reach a fixed point")

    record = engine.run_to_fixpoint(game, step_budget=step_budget)
    counts: dict[str, int] = {v: 0 for v in game.graph.vertices}
    for v in record.sequence:
        counts[v] += 1

    chips = dict(game.initial)
    edges = dict(game.graph.edges)
    vertices = set(game.graph.vertices)
    designated = game.graph.sink

    # Never-fired vertices lose their outgoing edges and become sinks.
    for v in sorted(vertices):
        if counts[v] == 0 and v != designated:
            edges = {e: m for e, m in edges.items() if e[0] != v}

    def out_zero() -> list[str]:
        heads = {u for (u, _w) in edges}
        return sorted(v for v in vertices if v not in heads)

    sinks = out_zero()
    if not sinks:
        fresh = _fresh_name("bot", frozenset(vertices))
        vertices.add(fresh)
        chips[fresh] = 0
        sinks = [fresh]

    if designated in sinks:
        sink = designated
    else:
        sink = sinks[0]
    for other in sinks:
        if other == sink:
            continue
        chips[sink] += chips.pop(other)
        vertices.remove(other)
        redirected: dict[tuple[str, str], int] = {}
        for (u, w), m in edges.items():
            tgt = sink if w == other else w
            redirected[(u, tgt)] = redirected.get((u, tgt), 0) + m
        edges = redirected

    # Loop removal, licensed only where the vertex fires at most once.
    for v in sorted(vertices):
        m = edges.get((v, v), 0)
        if m and counts.get(v, 0) <= 1:
            del edges[(v, v)]
            edges[(v, sink)] = edges.get((v, sink), 0) + m

    graph = MultiGraph(frozenset(vertices), edges, sink)
    return Game(graph, chips, "cfg")


# ---------------------------------------------------------------------------
# JSON game format

_TOP_KEYS = {"kind", "vertices", "sink", "edges", "mutations"}
_VERTEX_KEYS = {"name", "chips"}


def game_to_dict(game: Game) -> dict[str, Any]:
    """Canonical JSON-ready form: vertices and edges sorted, asm edges once."""
    g = game.graph
    vertices = [{"name": v, "chips": game.initial[v]} for v in g.vertex_order]
    edges: list[list[Any]] = []
    if game.kind == "asm":
        seen: set[frozenset[str]] = set()
        for (u, v), m in g.edges.items():
            if g.sink is not None and v == g.sink:
                edges.append([u, v, m])
            elif u == v:
                edges.append([u, v, m])
            else:
                pair = frozenset((u, v))
                if pair in seen:
                    continue
                seen.add(pair)
                a, b = sorted(pair)
                edges.append([a, b, m])
    else:
        for (u, v), m in g.edges.items():
            edges.append([u, v, m])
    edges.sort(key=lambda e: (e[0], e[1]))

    out: dict[str, Any] = {
        "kind": game.kind,
        "vertices": vertices,
        "sink": g.sink,
        "edges": edges,
    }
    if game.kind == "mcfg":
        muts: dict[str, list[list[str]]] = {}
        assert game.mutations is not None
        for v in g.vertex_order:
            tail = game.mutations.entries.get(v, ())[1:]
            if tail:
                muts[v] = [_multiset_to_list(e) for e in tail]
        if muts:
            out["mutations"] = muts
    return out


def game_from_dict(data: Any) -> Game:
    """Parse the JSON game format; unknown fields are rejected."""
    if not isinstance(data, dict):
        raise GameFormatError("top level must be an object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise GameFormatError(f"unknown field(s): {sorted(unknown)}")
    for key in ("kind", "vertices", "sink", "edges"):
        if key not in data:
            raise GameFormatError(f"missing field {key!r}")

    kind = data["kind"]
    if kind not in KINDS:
        raise GameFormatError(f"kind must be one of {KINDS}, got {kind!r}")

    if not isinstance(data["vertices"], list):
        raise GameFormatError("vertices must be a list")
    chips: dict[str, int] = {}
    for i, item in enumerate(data["vertices"]):
        if not isinstance(item, dict) or set(item) != _VERTEX_KEYS:
            raise GameFormatError(f"vertices[{i}] must have exactly name and chips")
        name, count = item["name"], item["chips"]
        if not isinstance(name, str) or not name:
            raise GameFormatError(f"vertices[{i}].name must be a non-empty string")
        if not isinstance(count, int) or isinstance(count, bool) or count < 0:
            raise GameFormatError(f"vertices[{i}].chips must be an integer >= 0")
        if name in chips:
            raise GameFormatError(f"duplicate vertex {name!r}")
        chips[name] = count

    sink = data["sink"]
    if sink is not None and not isinstance(sink, str):
        raise GameFormatError("sink must be a string or null")

    if not isinstance(data["edges"], list):
        raise GameFormatError("edges must be a list")
    edge_list: list[tuple[str, str, int]] = []
    for i, item in enumerate(data["edges"]):
        if (not isinstance(item, list) or len(item) != 3
                or not isinstance(item[0], str) or not isinstance(item[1], str)
                or not isinstance(item[2], int) or isinstance(item[2], bool)):
            raise GameFormatError(f"edges[{i}] must be [from, to, multiplicity]")
        if item[2] < 1:
            raise GameFormatError(f"edges[{i}] multiplicity must be >= 1")
        edge_list.append((item[0], item[1], item[2]))

    mutations = data.get("mutations")
    if mutations is not None and kind != "mcfg":
        raise GameFormatError("mutations are only allowed for mcfg games")

    if kind == "asm":
        return asm(chips, edge_list, sink)
    if kind == "cfg":
        return cfg(chips, edge_list, sink)

    tails: dict[str, list[list[str]]] = {}
    if mutations is not None:
        if not isinstance(mutations, dict):
            raise GameFormatError("mutations must be an object")
        for v, entries in mutations.items():
            if v not in chips:
                raise GameFormatError(f"mutations for unknown vertex {v!r}")
            if not isinstance(entries, list):
                raise GameFormatError(f"mutations[{v!r}] must be a list of lists")
            for j, entry in enumerate(entries):
                if not isinstance(entry, list) or any(not isinstance(x, str) for x in entry):
                    raise GameFormatError(
                        f"mutations[{v!r}][{j}] must be a list of vertex names")
            tails[v] = entries
    return mcfg(chips, edge_list, tails, sink)


def dumps_game(game: Game) -> str:
    return json.dumps(game_to_dict(game), indent=2, sort_keys=True) + "\n"


def loads_game(text: str) -> Game:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"invalid JSON: {exc}") from exc
    return game_from_dict(data)
