"""mDAGs and conditional DAGs: construction, validation, and structural ops.

An mDAG is a directed acyclic graph over random vertices V and parentless
fixed vertices W, together with a family of bidirected hyper-edges: inclusion
maximal subsets of V of size at least two.  Every vertex carries a finite
cardinality.  All graph values are immutable and all set-valued outputs are
sorted, so every operation here is a deterministic pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import (
    BidirectedEdgeNotMaximalError,
    BidirectedEdgeTooSmallError,
    CardinalityBelowTwoError,
    CyclicGraphError,
    FixedVertexHasParentError,
    UnknownVertexError,
    VertexHasChildrenError,
)

VSet = tuple[str, ...]


def _vset(items: Iterable[str]) -> VSet:
    return tuple(sorted(set(items)))


@dataclass(frozen=True)
class Mdag:
    """Hyper-graph G(V, W, E, B) with per-vertex cardinalities.

    Construct through :func:`build_mdag`, which validates the invariants:
    acyclic directed part, parentless fixed vertices, and inclusion-maximal
    bidirected edges of size >= 2 over random vertices only.
    """

    random_vertices: VSet
    fixed_vertices: VSet
    directed_edges: frozenset[tuple[str, str]]
    bidirected_edges: tuple[VSet, ...]
    cards: tuple[tuple[str, int], ...]

    @property
    def vertices(self) -> VSet:
        return _vset(self.random_vertices + self.fixed_vertices)

    @property
    def cardinalities(self) -> dict[str, int]:
        return dict(self.cards)

    def card(self, v: str) -> int:
        for name, c in self.cards:
            if name == v:
                return c
        raise UnknownVertexError(v)

    def describe(self) -> str:
        b = " ".join("{" + ",".join(e) + "}" for e in self.bidirected_edges) or "-"
        d = " ".join(f"{a}->{z}" for a, z in sorted(self.directed_edges)) or "-"
        return (
            f"random: {' '.join(self.random_vertices) or '-'}; "
            f"fixed: {' '.join(self.fixed_vertices) or '-'}; "
            f"directed: {d}; bidirected: {b}"
        )


@dataclass(frozen=True)
class ConditionalDag:
    """DAG obtained from an mDAG by replacing bidirected edges with latents.

    ``latent_labels`` maps each added latent vertex to the bidirected edge it
    replaces; latent vertices are parentless and their children are exactly
    that edge.
    """

    random_vertices: VSet
    fixed_vertices: VSet
    directed_edges: frozenset[tuple[str, str]]
    latent_labels: tuple[tuple[str, VSet], ...]


def _check_known(g_vertices: set[str], names: Iterable[str]) -> None:
    for v in names:
        if v not in g_vertices:
            raise UnknownVertexError(f"unknown vertex {v!r}")


def _toposort(vertices: Sequence[str], edges: Iterable[tuple[str, str]]) -> list[str]:
    """Kahn topological sort with lexicographic tie-breaking."""
    indeg = {v: 0 for v in vertices}
    ch: dict[str, list[str]] = {v: [] for v in vertices}
    for a, b in edges:
        indeg[b] += 1
        ch[a].append(b)
    ready = sorted(v for v in vertices if indeg[v] == 0)
    order: list[str] = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        changed = False
        for w in ch[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
                changed = True
        if changed:
            ready.sort()
    if len(order) != len(vertices):
        raise CyclicGraphError("directed part contains a cycle")
    return order


def _maximalize(edges: Iterable[frozenset[str]]) -> tuple[VSet, ...]:
    """Drop bidirected edges contained in another; dedupe; sort."""
    pool = sorted(set(edges), key=lambda e: (-len(e), tuple(sorted(e))))
    kept: list[frozenset[str]] = []
    for e in pool:
        if not any(e < k or e == k for k in kept):
            kept.append(e)
    return tuple(sorted(tuple(sorted(e)) for e in kept))


def build_mdag(
    random: Iterable[str],
    fixed: Iterable[str] = (),
    directed: Iterable[tuple[str, str]] = (),
    bidirected: Iterable[Iterable[str]] = (),
    cards: Mapping[str, int] | None = None,
    *,
    maximality: str = "strict",
) -> Mdag:
    """Validate raw pieces into an :class:`Mdag`.

    ``maximality`` is ``"strict"`` (reject a bidirected family with nested
    edges) or ``"normalize"`` (silently drop dominated edges).  Vertices
    missing from ``cards`` default to cardinality 2.
    """
    if maximality not in ("strict", "normalize"):
        raise ValueError("maximality must be 'strict' or 'normalize'")
    rand = _vset(random)
    fix = _vset(fixed)
    if set(rand) & set(fix):
        raise UnknownVertexError(
            f"vertices both random and fixed: {sorted(set(rand) & set(fix))}"
        )
    allv = set(rand) | set(fix)

    dedges = set()
    for a, b in directed:
        _check_known(allv, (a, b))
        if a == b:
            raise CyclicGraphError(f"self loop {a}->{b}")
        if b in fix:
            raise FixedVertexHasParentError(f"fixed vertex {b!r} has parent {a!r}")
        dedges.add((a, b))
    _toposort(sorted(allv), dedges)

    raw_b = []
    for e in bidirected:
        es = frozenset(e)
        _check_known(allv, es)
        if len(es) < 2:
            raise BidirectedEdgeTooSmallError(f"bidirected edge {sorted(es)} has size < 2")
        if not es <= set(rand):
            raise FixedVertexHasParentError(
                f"bidirected edge {sorted(es)} touches a fixed vertex"
            )
        raw_b.append(es)
    if maximality == "strict":
        for e in raw_b:
            if any(e < f for f in raw_b):
                raise BidirectedEdgeNotMaximalError(
                    f"bidirected edge {sorted(e)} is contained in a larger one"
                )
    bedges = _maximalize(raw_b)

    card_map = dict(cards) if cards is not None else {}
    _check_known(allv, card_map)
    full_cards = []
    for v in sorted(allv):
        c = int(card_map.get(v, 2))
        if c < 2:
            raise CardinalityBelowTwoError(f"vertex {v!r} has cardinality {c}")
        full_cards.append((v, c))

    return Mdag(rand, fix, frozenset(dedges), bedges, tuple(full_cards))


@lru_cache(maxsize=256)
def _parent_map(g: Mdag) -> dict[str, VSet]:
    pa: dict[str, set[str]] = {v: set() for v in g.vertices}
    for a, b in g.directed_edges:
        pa[b].add(a)
    return {v: _vset(s) for v, s in pa.items()}


@lru_cache(maxsize=256)
def _child_map(g: Mdag) -> dict[str, VSet]:
    ch: dict[str, set[str]] = {v: set() for v in g.vertices}
    for a, b in g.directed_edges:
        ch[a].add(b)
    return {v: _vset(s) for v, s in ch.items()}


def parents(g: Mdag, s: Iterable[str]) -> VSet:
    """pa_G(S): union of parents of the members of S (may intersect S)."""
    pm = _parent_map(g)
    out: set[str] = set()
    for v in s:
        if v not in pm:
            raise UnknownVertexError(v)
        out.update(pm[v])
    return _vset(out)


def children(g: Mdag, s: Iterable[str]) -> VSet:
    cm = _child_map(g)
    out: set[str] = set()
    for v in s:
        if v not in cm:
            raise UnknownVertexError(v)
        out.update(cm[v])
    return _vset(out)


def sterile(g: Mdag, c: Iterable[str]) -> VSet:
    """sterile_G(C) = C minus any member with a child inside C."""
    cset = set(c)
    _check_known(set(g.vertices), cset)
    pa_of_c = set(parents(g, cset))
    return _vset(cset - pa_of_c)


def _bidirected_components(vertices: Iterable[str], edges: Iterable[Iterable[str]]) -> list[VSet]:
    parent: dict[str, str] = {v: v for v in vertices}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        members = [v for v in e if v in parent]
        for a, b in zip(members, members[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups: dict[str, set[str]] = {}
    for v in parent:
        groups.setdefault(find(v), set()).add(v)
    return sorted((_vset(s) for s in groups.values()), key=lambda t: t[0])


def districts(g: Mdag) -> list[VSet]:
    """Partition of V into maximal bidirected-connected sets, sorted by least element."""
    return _bidirected_components(g.random_vertices, g.bidirected_edges)


def is_bidirected_connected(g: Mdag, c: Iterable[str]) -> bool:
    """Whether C is bidirected-connected using only paths inside C."""
    cset = _vset(c)
    _check_known(set(g.random_vertices), cset)
    if len(cset) <= 1:
        return True
    restricted = [set(e) & set(cset) for e in g.bidirected_edges]
    comps = _bidirected_components(cset, [e for e in restricted if len(e) >= 2])
    return len(comps) == 1


def district_subgraph(g: Mdag, d: Iterable[str]) -> Mdag:
    """G[D]: random D, fixed pa(D)\\D, edges into D, bidirected edges cut to D."""
    dset = _vset(d)
    _check_known(set(g.random_vertices), dset)
    new_fixed = _vset(set(parents(g, dset)) - set(dset))
    keep = set(dset) | set(new_fixed)
    dedges = {(a, b) for a, b in g.directed_edges if b in dset and a in keep}
    bedges = _maximalize(
        frozenset(set(e) & set(dset)) for e in g.bidirected_edges if len(set(e) & set(dset)) >= 2
    )
    cards = tuple((v, c) for v, c in g.cards if v in keep)
    return Mdag(dset, new_fixed, frozenset(dedges), bedges, cards)


def remove_childless(g: Mdag, v: str) -> Mdag:
    """Delete a childless random vertex; fixed vertices are kept unchanged."""
    if v not in g.vertices:
        raise UnknownVertexError(v)
    if v not in g.random_vertices:
        raise VertexHasChildrenError(f"{v!r} is a fixed vertex")
    if children(g, (v,)):
        raise VertexHasChildrenError(f"vertex {v!r} has children {children(g, (v,))}")
    new_rand = _vset(set(g.random_vertices) - {v})
    dedges = {(a, b) for a, b in g.directed_edges if a != v and b != v}
    bedges = _maximalize(
        frozenset(set(e) - {v}) for e in g.bidirected_edges if len(set(e) - {v}) >= 2
    )
    cards = tuple((w, c) for w, c in g.cards if w != v)
    return Mdag(new_rand, g.fixed_vertices, frozenset(dedges), bedges, cards)


def canonical_dag(g: Mdag) -> ConditionalDag:
    """Replace each bidirected edge with a fresh parentless latent vertex."""
    used = set(g.vertices)
    labels: list[tuple[str, VSet]] = []
    dedges = set(g.directed_edges)
    for i, e in enumerate(g.bidirected_edges, start=1):
        name = f"u{i}"
        while name in used:
            name += "_"
        used.add(name)
        labels.append((name, e))
        for child in e:
            dedges.add((name, child))
    new_rand = _vset(set(g.random_vertices) | {name for name, _ in labels})
    return ConditionalDag(new_rand, g.fixed_vertices, frozenset(dedges), tuple(labels))


def topological_order(g: Mdag) -> list[str]:
    """Canonical topological order of the random vertices (lexicographic ties)."""
    edges = [(a, b) for a, b in g.directed_edges if a in g.random_vertices and b in g.random_vertices]
    return _toposort(g.random_vertices, edges)
