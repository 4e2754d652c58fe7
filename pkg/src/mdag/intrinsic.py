"""Intrinsic sets, recursive heads and tails, and parametrizable sets.

A set is intrinsic when it is a district of some graph reachable from G by
(a) passing to a district and (b) deleting a childless vertex.  Both moves
only ever delete random vertices, so a reachable graph is determined by its
surviving random set S; enumeration therefore walks subsets of V.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import NotBidirectedConnectedError, SearchBudgetExceededError, UnknownVertexError
from .graph import Mdag, VSet, _bidirected_components, _vset, parents, sterile

DIFFSET_VERTEX_LIMIT = 16


@dataclass(frozen=True)
class IntrinsicRecord:
    """An intrinsic set S with its recursive head H = sterile(S) and tail T = pa(S)."""

    intrinsic_set: VSet
    head: VSet
    tail: VSet


@dataclass(frozen=True)
class PsetFamily:
    """The parametrizable sets A(G) with one witnessing (head, tail) per set."""

    sets: tuple[VSet, ...]
    provenance: tuple[tuple[VSet, tuple[VSet, VSet]], ...]

    def witness(self, a: Iterable[str]) -> tuple[VSet, VSet]:
        key = _vset(a)
        for s, ht in self.provenance:
            if s == key:
                return ht
        raise KeyError(key)

    def __contains__(self, a: object) -> bool:
        try:
            key = _vset(a)  # type: ignore[arg-type]
        except TypeError:
            return False
        return key in self.sets


def _induced_children(g: Mdag, s: frozenset[str]) -> dict[str, set[str]]:
    ch: dict[str, set[str]] = {v: set() for v in s}
    for a, b in g.directed_edges:
        if a in s and b in s:
            ch[a].add(b)
    return ch


def _induced_districts(g: Mdag, s: frozenset[str]) -> list[VSet]:
    edges = [set(e) & s for e in g.bidirected_edges]
    return _bidirected_components(sorted(s), [e for e in edges if len(e) >= 2])


@lru_cache(maxsize=64)
def _reachable_connected_sets(g: Mdag) -> tuple[VSet, ...]:
    """All intrinsic sets of G, as sorted tuples."""
    start = frozenset(g.random_vertices)
    seen: set[frozenset[str]] = set()
    intrinsic: set[VSet] = set()
    stack = [start]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        if not s:
            continue
        dists = _induced_districts(g, s)
        if len(dists) == 1:
            intrinsic.add(dists[0])
        for d in dists:
            fd = frozenset(d)
            if fd not in seen:
                stack.append(fd)
        ch = _induced_children(g, s)
        for v in s:
            if not ch[v]:
                rest = s - {v}
                if rest not in seen:
                    stack.append(rest)
    return tuple(sorted(intrinsic, key=lambda t: (len(t), t)))


def intrinsic_sets(g: Mdag) -> list[IntrinsicRecord]:
    """All intrinsic sets with heads and tails, sorted by (size, members)."""
    out = []
    for s in _reachable_connected_sets(g):
        h = sterile(g, s)
        t = _vset(set(parents(g, s)) - set(h))
        out.append(IntrinsicRecord(s, h, t))
    return out


def parametrizable_sets(g: Mdag) -> PsetFamily:
    """A(G) = {H u A : H a recursive head, A a subset of its tail}, deduplicated.

    A set reachable from several heads is recorded once, with the
    lexicographically smallest witnessing head.
    """
    found: dict[VSet, tuple[VSet, VSet]] = {}
    for rec in intrinsic_sets(g):
        h, t = rec.head, rec.tail
        for r in range(len(t) + 1):
            for extra in itertools.combinations(t, r):
                a = _vset(set(h) | set(extra))
                if a not in found or h < found[a][0]:
                    found[a] = (h, t)
    sets = tuple(sorted(found, key=lambda s: (len(s), s)))
    return PsetFamily(sets, tuple((s, found[s]) for s in sets))


@dataclass(frozen=True)
class DiffsetWitness:
    """A bidirected-connected C and sets {v} <= A_v <= {v} u pa(v) with symdiff A."""

    connected_set: VSet
    parts: tuple[tuple[str, VSet], ...]

    def part(self, v: str) -> VSet:
        return dict(self.parts)[v]


def _symdiff(sets: Iterable[Iterable[str]]) -> VSet:
    count: dict[str, int] = {}
    for s in sets:
        for v in s:
            count[v] = count.get(v, 0) + 1
    return _vset(v for v, c in count.items() if c % 2 == 1)


def _connected_subsets(g: Mdag) -> list[VSet]:
    """Bidirected-connected subsets of V by (size, members)."""
    from .graph import is_bidirected_connected

    out = []
    verts = g.random_vertices
    for r in range(1, len(verts) + 1):
        for combo in itertools.combinations(verts, r):
            if is_bidirected_connected(g, combo):
                out.append(combo)
    return out


def verify_diffsets(g: Mdag, a: Iterable[str]) -> DiffsetWitness | None:
    """Search for a symmetric-difference witness that A is parametrizable.

    Candidates C are scanned by increasing size then lexicographically, and
    the per-vertex parent subsets in lexicographic order; the first witness
    is returned.  ``None`` means the exhaustive search found nothing, i.e.
    A is not in A(G).
    """
    if len(g.random_vertices) > DIFFSET_VERTEX_LIMIT:
        raise SearchBudgetExceededError(
            f"diffset search guarded to |V| <= {DIFFSET_VERTEX_LIMIT}"
        )
    target = _vset(a)
    for v in target:
        if v not in g.vertices:
            raise UnknownVertexError(v)
    for c in _connected_subsets(g):
        if not set(sterile(g, c)) <= set(target):
            continue
        reach = set(c) | set(parents(g, c))
        if not set(target) <= reach:
            continue
        pa_lists = []
        for v in c:
            pv = parents(g, (v,))
            subsets = []
            for r in range(len(pv) + 1):
                subsets.extend(itertools.combinations(pv, r))
            subsets.sort(key=lambda s: (len(s), s))
            pa_lists.append(subsets)
        for choice in itertools.product(*pa_lists):
            parts = [_vset({v} | set(extra)) for v, extra in zip(c, choice)]
            if _symdiff(parts) == target:
                return DiffsetWitness(c, tuple(zip(c, parts)))
    return None


def minimal_intrinsic_superset(g: Mdag, c: Iterable[str]) -> IntrinsicRecord:
    """Smallest intrinsic S >= C; it satisfies sterile(S) <= sterile(C)."""
    from .graph import is_bidirected_connected

    cset = _vset(c)
    if not is_bidirected_connected(g, cset):
        raise NotBidirectedConnectedError(f"{cset} is not bidirected-connected")
    for rec in intrinsic_sets(g):
        if set(cset) <= set(rec.intrinsic_set):
            return rec
    raise NotBidirectedConnectedError(f"no intrinsic superset of {cset}")


def model_dimension(g: Mdag) -> int:
    """Dimension of the nested model: sum over A(G) of prod_{a in A}(|X_a| - 1).

    Equivalently sum over heads of prod_{h in H}(|X_h| - 1) * |X_T|, since
    each parametrizable set arises from one head.  (Replacing the product by
    |X_H| - 1 does not count simplex dimensions correctly: on the binary
    four-variable chain with one long-range confounder it would give 19
    where the model is 11-dimensional.)
    """
    cards = g.cardinalities
    total = 0
    for s in parametrizable_sets(g).sets:
        term = 1
        for v in s:
            term *= cards[v] - 1
        total += term
    return total


def head_tail_dimension(g: Mdag) -> int:
    """The same dimension computed head by head (cross-check form)."""
    cards = g.cardinalities
    total = 0
    for rec in intrinsic_sets(g):
        term = 1
        for h in rec.head:
            term *= cards[h] - 1
        for t in rec.tail:
            term *= cards[t]
        total += term
    return total
