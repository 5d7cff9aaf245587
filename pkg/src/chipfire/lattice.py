"""Finite posets: joins and meets, structure predicates, isomorphism.

The order relation is kept as one bitmask per element (transitive
closure up-sets and down-sets), so comparability queries are O(1) and
bound computations are word-parallel. Join and meet tables are numpy
arrays, filled once per poset and cached.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import InternalInconsistency, NoUniqueExtremes, NotALattice


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class FinitePoset:
    """An immutable finite poset given by its covering relation."""

    def __init__(self, elements: Sequence[Any], covers: Iterable[tuple[int, int]]):
        self.elements = tuple(elements)
        self.n = len(self.elements)
        self.covers = tuple(sorted(set((int(x), int(y)) for x, y in covers)))
        for x, y in self.covers:
            if not (0 <= x < self.n and 0 <= y < self.n) or x == y:
                raise ValueError(f"bad cover pair ({x}, {y})")

        self._upper: list[list[int]] = [[] for _ in range(self.n)]
        self._lower: list[list[int]] = [[] for _ in range(self.n)]
        for x, y in self.covers:
            self._upper[x].append(y)
            self._lower[y].append(x)

        self._topo = self._topological_order()
        self.up = [0] * self.n
        self.down = [0] * self.n
        for i in reversed(self._topo):
            mask = 1 << i
            for j in self._upper[i]:
                mask |= self.up[j]
            self.up[i] = mask
        for i in self._topo:
            mask = 1 << i
            for j in self._lower[i]:
                mask |= self.down[j]
            self.down[i] = mask

        for x, y in self.covers:
            if (self.up[x] & self.down[y]).bit_count() != 2:
                raise ValueError(f"({x}, {y}) is not a cover: the interval "
                                 "contains intermediate elements")

        self.height = [0] * self.n
        for i in self._topo:
            if self._lower[i]:
                self.height[i] = 1 + max(self.height[j] for j in self._lower[i])
        self.depth = [0] * self.n
        for i in reversed(self._topo):
            if self._upper[i]:
                self.depth[i] = 1 + max(self.depth[j] for j in self._upper[i])

        self._tables: tuple[np.ndarray, np.ndarray] | None = None

    def _topological_order(self) -> list[int]:
        indeg = [len(self._lower[i]) for i in range(self.n)]
        ready = sorted(i for i in range(self.n) if indeg[i] == 0)
        order: list[int] = []
        import heapq

        heap = list(ready)
        heapq.heapify(heap)
        while heap:
            i = heapq.heappop(heap)
            order.append(i)
            for j in self._upper[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(heap, j)
        if len(order) != self.n:
            raise ValueError("cover relation contains a cycle")
        return order

    @classmethod
    def from_leq(cls, elements: Sequence[Any],
                 leq: Callable[[Any, Any], bool]) -> "FinitePoset":
        """Build from an order predicate on the element payloads; the
        covering relation is derived as the transitive reduction."""
        n = len(elements)
        up = [0] * n
        for i in range(n):
            mask = 0
            for j in range(n):
                if leq(elements[i], elements[j]):
                    mask |= 1 << j
            up[i] = mask
        down = [0] * n
        for i in range(n):
            for j in _bits(up[i]):
                down[j] |= 1 << i
        covers = []
        for i in range(n):
            for j in _bits(up[i] & ~(1 << i)):
                if (up[i] & down[j]).bit_count() == 2:
                    covers.append((i, j))
        return cls(elements, covers)

    # -- basic queries -----------------------------------------------------

    def leq(self, i: int, j: int) -> bool:
        return bool((self.up[i] >> j) & 1)

    def upper_covers(self, i: int) -> list[int]:
        return list(self._upper[i])

    def lower_covers(self, i: int) -> list[int]:
        return list(self._lower[i])

    @property
    def minimal_elements(self) -> list[int]:
        return [i for i in range(self.n) if not self._lower[i]]

    @property
    def maximal_elements(self) -> list[int]:
        return [i for i in range(self.n) if not self._upper[i]]

    def dual(self) -> "FinitePoset":
        return FinitePoset(self.elements, [(y, x) for x, y in self.covers])

    def interval(self, i: int, j: int) -> "FinitePoset":
        """The sub-poset of elements z with i <= z <= j."""
        members = [k for k in _bits(self.up[i] & self.down[j])]
        pos = {k: t for t, k in enumerate(members)}
        inside = set(members)
        covers = [(pos[x], pos[y]) for x, y in self.covers
                  if x in inside and y in inside]
        return FinitePoset([self.elements[k] for k in members], covers)

    # -- joins and meets ---------------------------------------------------

    def _bound(self, i: int, j: int, relation: str) -> int:
        if relation == "join":
            commons = self.up[i] & self.up[j]
            strict = self.down
        else:
            commons = self.down[i] & self.down[j]
            strict = self.up
        if not commons:
            raise NotALattice(relation, (i, j), ())
        extremes = [k for k in _bits(commons)
                    if not (commons & strict[k] & ~(1 << k))]
        if len(extremes) != 1:
            raise NotALattice(relation, (i, j), tuple(extremes[:2]))
        return extremes[0]

    def join_meet_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Tables J[i, j] = i v j and M[i, j] = i ^ j; NotALattice with a
        witness pair when some pair lacks a unique bound."""
        if self._tables is not None:
            return self._tables
        n = self.n
        join = np.empty((n, n), dtype=np.int32)
        meet = np.empty((n, n), dtype=np.int32)
        for i in range(n):
            join[i, i] = meet[i, i] = i
            for j in range(i + 1, n):
                if self.leq(i, j):
                    jo, me = j, i
                elif self.leq(j, i):
                    jo, me = i, j
                else:
                    jo = self._bound(i, j, "join")
                    me = self._bound(i, j, "meet")
                join[i, j] = join[j, i] = jo
                meet[i, j] = meet[j, i] = me
        self._tables = (join, meet)
        return self._tables

    def __repr__(self) -> str:
        return f"FinitePoset(n={self.n}, covers={len(self.covers)})"


# ---------------------------------------------------------------------------
# Predicates


def joins_meets(p: FinitePoset) -> tuple[np.ndarray, np.ndarray]:
    return p.join_meet_tables()


def is_lattice(p: FinitePoset) -> bool:
    try:
        p.join_meet_tables()
        return True
    except NotALattice:
        return False


def is_ranked(p: FinitePoset) -> bool:
    """All maximal chains between the unique extremes have one length.

    Equivalent check: every cover raises the longest-path rank by one.
    """
    if len(p.minimal_elements) != 1 or len(p.maximal_elements) != 1:
        raise NoUniqueExtremes("ranking needs a unique minimum and maximum")
    return all(p.height[y] == p.height[x] + 1 for x, y in p.covers)


def is_hypercube(p: FinitePoset) -> tuple[bool, int | None]:
    """Whether p is the lattice of all subsets of a k-element set.

    Each element is mapped to the set of atoms below it; p is a
    hypercube exactly when that map is a bijection onto 2^atoms that
    preserves and reflects the order.
    """
    if p.n == 1:
        return True, 0
    mins = p.minimal_elements
    if len(mins) != 1:
        return False, None
    bottom = mins[0]
    atoms = p.upper_covers(bottom)
    k = len(atoms)
    if p.n != 1 << k:
        return False, None
    sig = []
    for i in range(p.n):
        s = 0
        for t, a in enumerate(atoms):
            if p.leq(a, i):
                s |= 1 << t
        sig.append(s)
    if len(set(sig)) != p.n:
        return False, None
    for i in range(p.n):
        for j in range(p.n):
            if p.leq(i, j) != (sig[i] & ~sig[j] == 0):
                return False, None
    return True, k


def _local_hypercube_violation(p: FinitePoset, upward: bool) -> int | None:
    """First element whose interval to the join of its upper covers (or
    dually from the meet of its lower covers) is not a hypercube."""
    join, meet = p.join_meet_tables()
    for x in range(p.n):
        covers = p.upper_covers(x) if upward else p.lower_covers(x)
        if not covers:
            continue
        bound = covers[0]
        for c in covers[1:]:
            bound = int(join[bound, c]) if upward else int(meet[bound, c])
        sub = p.interval(x, bound) if upward else p.interval(bound, x)
        if not is_hypercube(sub)[0]:
            return x
    return None


def is_uld(p: FinitePoset) -> bool:
    """Upper local distributivity: every interval from an element to the
    join of its upper covers is a hypercube."""
    return _local_hypercube_violation(p, upward=True) is None


def is_lld(p: FinitePoset) -> bool:
    return _local_hypercube_violation(p, upward=False) is None


def _distributivity_violation(p: FinitePoset) -> tuple[int, int, int] | None:
    """First triple breaking x v (y ^ z) = (x v y) ^ (x v z), or None."""
    join, meet = p.join_meet_tables()
    for x in range(p.n):
        jx = join[x]
        lhs = jx[meet]
        rhs = meet[jx[:, None], jx[None, :]]
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            y, z = map(int, bad[0])
            return x, y, z
    return None


def is_distributive(p: FinitePoset) -> bool:
    return _distributivity_violation(p) is None


# ---------------------------------------------------------------------------
# Isomorphism


def _joint_refined_labels(p: FinitePoset, q: FinitePoset) -> tuple[list[int], list[int]]:
    """Iterated neighbourhood refinement of order-invariant signatures.

    Both posets are refined against one shared intern table per round,
    so equal label ids mean structurally indistinguishable elements
    across the two posets.
    """
    def base(r: FinitePoset) -> list[Any]:
        return [(r.height[i], r.depth[i], len(r.upper_covers(i)),
                 len(r.lower_covers(i)), r.up[i].bit_count(),
                 r.down[i].bit_count()) for i in range(r.n)]

    table: dict[Any, int] = {}
    lp = [table.setdefault(l, len(table)) for l in base(p)]
    lq = [table.setdefault(l, len(table)) for l in base(q)]
    for _ in range(p.n + q.n):
        table = {}

        def step(r: FinitePoset, cur: list[int]) -> list[int]:
            out = []
            for i in range(r.n):
                key = (cur[i],
                       tuple(sorted(cur[j] for j in r.upper_covers(i))),
                       tuple(sorted(cur[j] for j in r.lower_covers(i))))
                out.append(table.setdefault(key, len(table)))
            return out

        np_, nq = step(p, lp), step(q, lq)
        if len(set(np_) | set(nq)) == len(set(lp) | set(lq)):
            return np_, nq
        lp, lq = np_, nq
    return lp, lq


def isomorphic(p: FinitePoset, q: FinitePoset) -> dict[int, int] | None:
    """An order-preserving and order-reflecting bijection, or None.

    Backtracking maps p's elements in topological order; a candidate
    must carry the same refined signature and its lower covers must be
    exactly the images of the element's lower covers, which makes any
    completed assignment a cover isomorphism.
    """
    if p.n != q.n or len(p.covers) != len(q.covers):
        return None
    lp, lq = _joint_refined_labels(p, q)
    if Counter(lp) != Counter(lq):
        return None

    by_class: dict[int, list[int]] = {}
    for j in range(q.n):
        by_class.setdefault(lq[j], []).append(j)

    order = p._topo
    mapping = [-1] * p.n
    used = [False] * q.n
    q_lower = [frozenset(q.lower_covers(j)) for j in range(q.n)]

    def extend(k: int) -> bool:
        if k == p.n:
            return True
        x = order[k]
        lows = frozenset(mapping[c] for c in p.lower_covers(x))
        for y in by_class.get(lp[x], ()):
            if used[y] or q_lower[y] != lows:
                continue
            mapping[x] = y
            used[y] = True
            if extend(k + 1):
                return True
            mapping[x] = -1
            used[y] = False
        return False

    if not extend(0):
        return None

    for i in range(p.n):
        image = 0
        for j in _bits(p.up[i]):
            image |= 1 << mapping[j]
        if image != q.up[mapping[i]]:
            raise InternalInconsistency("cover bijection does not preserve order")
    return {i: mapping[i] for i in range(p.n)}


# ---------------------------------------------------------------------------
# Reports


@dataclass
class LatticeReport:
    """Flags for every structure predicate, with witnesses on failure."""

    n_elements: int
    n_covers: int
    is_lattice: bool
    is_ranked: bool
    is_uld: bool
    is_lld: bool
    is_distributive: bool
    is_hypercube: bool
    hypercube_dim: int | None
    witnesses: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "elements": self.n_elements,
            "covers": self.n_covers,
            "lattice": self.is_lattice,
            "ranked": self.is_ranked,
            "uld": self.is_uld,
            "lld": self.is_lld,
            "distributive": self.is_distributive,
            "hypercube": self.is_hypercube,
            "hypercube_dim": self.hypercube_dim,
            "witnesses": self.witnesses,
        }


def analyze_poset(p: FinitePoset) -> LatticeReport:
    """Run every predicate, collecting counterexample witnesses."""
    witnesses: dict[str, Any] = {}

    lattice_ok = True
    try:
        p.join_meet_tables()
    except NotALattice as exc:
        lattice_ok = False
        witnesses["lattice"] = {
            "relation": exc.relation, "pair": list(exc.pair),
            "bounds": list(exc.bounds),
        }

    try:
        ranked = is_ranked(p)
        if not ranked:
            bad = next((x, y) for x, y in p.covers
                       if p.height[y] != p.height[x] + 1)
            witnesses["ranked"] = {"cover": list(bad)}
    except NoUniqueExtremes:
        ranked = False
        witnesses["ranked"] = {"reason": "no unique minimum and maximum"}

    cube, dim = is_hypercube(p)

    if lattice_ok:
        uld_bad = _local_hypercube_violation(p, upward=True)
        lld_bad = _local_hypercube_violation(p, upward=False)
        uld, lld = uld_bad is None, lld_bad is None
        if uld_bad is not None:
            witnesses["uld"] = {"element": uld_bad}
        if lld_bad is not None:
            witnesses["lld"] = {"element": lld_bad}
        triple = _distributivity_violation(p)
        distributive = triple is None
        if triple is not None:
            witnesses["distributive"] = {"triple": list(triple)}
        if distributive != (uld and lld):
            raise InternalInconsistency(
                "distributivity must coincide with upper plus lower local "
                "distributivity on a finite lattice")
    else:
        uld = lld = distributive = False

    return LatticeReport(
        n_elements=p.n,
        n_covers=len(p.covers),
        is_lattice=lattice_ok,
        is_ranked=ranked,
        is_uld=uld,
        is_lld=lld,
        is_distributive=distributive,
        is_hypercube=cube,
        hypercube_dim=dim,
        witnesses=witnesses,
    )
