"""Gearings: running-intersection orderings of bidirected edges.

A gearing orders the bidirected edges B_1..B_k so that each edge meets the
union of its predecessors inside a single earlier edge.  The remainder sets
R_j = B_j minus earlier edges then partition the covered vertices; vertices
outside every bidirected edge are given singleton cover sets appended after
the real edges, so the remainder sets always partition V and every vertex
owns a function space.  Each vertex v gets

    F_v = { f : X_pa(v) x F_pi(v) -> X_v },

where pi(v) collects the remainders of later edges containing v.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import (
    EnumerationBudgetExceededError,
    NotBidirectedConnectedError,
    NotGearedError,
    TooManyEdgesError,
    UnknownVertexError,
)
from .graph import Mdag, VSet, _vset, is_bidirected_connected, parents

GEARING_EDGE_LIMIT = 12


@dataclass(frozen=True)
class Gearing:
    """A validated edge order together with all derived structure.

    ``edge_order`` lists the real bidirected edges first (k = ``n_real``) and
    then one singleton set per uncovered vertex.  ``remainder_sets`` aligns
    with ``edge_order``; ``vertex_order`` puts later remainder sets first, so
    every member of pi(v) precedes v.
    """

    graph: Mdag
    edge_order: tuple[VSet, ...]
    n_real: int
    remainder_sets: tuple[VSet, ...]
    vertex_order: tuple[str, ...]
    pi_sets: tuple[tuple[str, VSet], ...]

    def r_of(self, v: str) -> int:
        for j, r in enumerate(self.remainder_sets):
            if v in r:
                return j
        raise UnknownVertexError(v)

    def pi(self, v: str) -> VSet:
        for name, s in self.pi_sets:
            if name == v:
                return s
        raise UnknownVertexError(v)

    @property
    def slots(self) -> int:
        return len(self.edge_order)


_SIZE_EXPONENT_LIMIT = 1 << 22


@dataclass(frozen=True)
class FunctionSpaceDescriptor:
    """Signature and exact size of one vertex's function space F_v.

    ``size`` is the exact big integer |X_v| ** input_cells; it is computed
    lazily because nested function spaces can have more cells than any
    integer that fits in memory (the exponent itself stays exact).
    """

    vertex: str
    observed_args: VSet
    functional_args: VSet
    output_cardinality: int
    input_cells: int

    @cached_property
    def size(self) -> int:
        if self.input_cells > _SIZE_EXPONENT_LIMIT:
            raise EnumerationBudgetExceededError(
                f"|F_{self.vertex}| = {self.output_cardinality}^{self.input_cells} "
                "is too large to materialize"
            )
        return self.output_cardinality ** self.input_cells

    @property
    def log2_size(self) -> float:
        return self.input_cells * math.log2(self.output_cardinality)


def _running_intersection_ok(order: Sequence[frozenset[str]]) -> bool:
    placed: set[str] = set()
    for j, e in enumerate(order):
        inter = e & placed
        if j > 0 and inter:
            if not any(inter <= order[i] for i in range(j)):
                return False
        placed |= e
    return True


def validate_edge_order(g: Mdag, order: Sequence[Iterable[str]]) -> tuple[VSet, ...]:
    """Check that ``order`` is exactly B(G) and satisfies running intersection."""
    tuples = tuple(_vset(e) for e in order)
    if sorted(tuples) != sorted(g.bidirected_edges):
        raise NotGearedError("edge order must be a permutation of the bidirected edges")
    if not _running_intersection_ok([frozenset(e) for e in tuples]):
        raise NotGearedError(f"order {tuples} violates running intersection")
    return tuples


def make_gearing(g: Mdag, order: Sequence[Iterable[str]]) -> Gearing:
    """Build the full gearing structure for a valid real-edge order."""
    real = validate_edge_order(g, order)
    covered: set[str] = set()
    for e in real:
        covered |= set(e)
    pseudo = tuple((v,) for v in g.random_vertices if v not in covered)
    edge_order = real + pseudo

    remainder: list[VSet] = []
    placed: set[str] = set()
    for e in edge_order:
        r = _vset(set(e) - placed)
        remainder.append(r)
        placed |= set(e)

    pi: dict[str, set[str]] = {v: set() for v in g.random_vertices}
    for j, r in enumerate(remainder):
        for v in r:
            for i in range(j + 1, len(edge_order)):
                if v in edge_order[i]:
                    pi[v].update(remainder[i])
    vertex_order = tuple(v for r in reversed(remainder) for v in r)
    pi_sets = tuple((v, _vset(pi[v])) for v in g.random_vertices)
    return Gearing(g, edge_order, len(real), tuple(remainder), vertex_order, pi_sets)


def enumerate_gearings(g: Mdag) -> Iterator[Gearing]:
    """All valid gearings, by lexicographic edge order.  Guarded brute force."""
    edges = [frozenset(e) for e in g.bidirected_edges]
    k = len(edges)
    if k > GEARING_EDGE_LIMIT:
        raise TooManyEdgesError(f"{k} bidirected edges exceeds guard {GEARING_EDGE_LIMIT}")
    order_keys = sorted(range(k), key=lambda i: g.bidirected_edges[i])
    failed_prefixes: set[frozenset[int]] = set()

    def extend(prefix: list[int], placed: set[str]) -> Iterator[list[int]]:
        if len(prefix) == k:
            yield list(prefix)
            return
        sig = frozenset(prefix)
        if sig in failed_prefixes:
            return
        produced = False
        for i in order_keys:
            if i in prefix:
                continue
            inter = edges[i] & placed
            if prefix and inter and not any(inter <= edges[j] for j in prefix):
                continue
            prefix.append(i)
            for full in extend(prefix, placed | edges[i]):
                produced = True
                yield full
            prefix.pop()
        if not produced:
            failed_prefixes.add(sig)

    for ordering in extend([], set()):
        yield make_gearing(g, [g.bidirected_edges[i] for i in ordering])


def find_gearing(g: Mdag) -> Gearing | None:
    """Lexicographically smallest valid gearing, or None if not geared."""
    for gr in enumerate_gearings(g):
        return gr
    return None


def is_geared(g: Mdag) -> bool:
    return find_gearing(g) is not None


def pi_of(g: Mdag, gearing: Gearing, v: str) -> VSet:
    """pi(v): union of remainder sets of later edges containing v."""
    if gearing.graph != g:
        raise UnknownVertexError("gearing belongs to a different graph")
    return gearing.pi(v)


@lru_cache(maxsize=1024)
def _space_cache(gearing: Gearing, v: str) -> FunctionSpaceDescriptor:
    g = gearing.graph
    obs = parents(g, (v,))
    fun = gearing.pi(v)
    cells = 1
    for p in obs:
        cells *= g.card(p)
    for w in fun:
        inner = _space_cache(gearing, w)
        if inner.input_cells > _SIZE_EXPONENT_LIMIT:
            raise EnumerationBudgetExceededError(
                f"|F_{w}| is too large to appear as an argument of F_{v}"
            )
        cells *= inner.size
    return FunctionSpaceDescriptor(v, obs, fun, g.card(v), cells)


def function_space(g: Mdag, gearing: Gearing, v: str) -> FunctionSpaceDescriptor:
    """Descriptor of F_v with exact big-integer size."""
    if v not in g.random_vertices:
        raise UnknownVertexError(v)
    return _space_cache(gearing, v)


def log2_assignment_budget(gearing: Gearing) -> float:
    """log2 of the total assignment count prod_v |F_v| under this gearing."""
    total = 0.0
    for v in gearing.graph.random_vertices:
        total += _space_cache(gearing, v).log2_size
    return total


def assignment_budget(gearing: Gearing) -> int:
    """Exact total assignment count; refuses when it cannot be materialized."""
    if log2_assignment_budget(gearing) > _SIZE_EXPONENT_LIMIT:
        raise EnumerationBudgetExceededError("assignment count too large to materialize")
    n = 1
    for v in gearing.graph.random_vertices:
        n *= _space_cache(gearing, v).size
    return n


def best_gearing(g: Mdag) -> Gearing | None:
    """The gearing minimizing the enumeration budget (ties: lexicographic).

    The lexicographically first valid ordering can have astronomically larger
    function spaces than another valid ordering of the same edges, so exact
    enumeration work always uses this selection instead.
    """
    best: tuple[float, tuple[VSet, ...]] | None = None
    best_gr: Gearing | None = None
    for gr in enumerate_gearings(g):
        key = (log2_assignment_budget(gr), gr.edge_order)
        if best is None or key < best:
            best = key
            best_gr = gr
    return best_gr


def geared_subgraph_for(g: Mdag, c: Iterable[str]) -> Mdag:
    """A geared subgraph in which C stays bidirected-connected.

    Same vertices and directed edges; the bidirected part becomes a spanning
    tree of size-2 edges over C, each contained in some edge of G, built by
    taking lexicographically smallest pairs under union-find.
    """
    cset = _vset(c)
    if not is_bidirected_connected(g, cset):
        raise NotBidirectedConnectedError(f"{cset} is not bidirected-connected")
    adj: list[tuple[str, str]] = []
    for u, v in itertools.combinations(cset, 2):
        if any(u in e and v in e for e in g.bidirected_edges):
            adj.append((u, v))
    parent = {v: v for v in cset}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree: list[tuple[str, str]] = []
    for u, v in sorted(adj):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            tree.append((u, v))
    return Mdag(
        g.random_vertices,
        g.fixed_vertices,
        g.directed_edges,
        tuple(sorted(tree)),
        g.cards,
    )


@dataclass(frozen=True)
class RemainderTree:
    """Rooted tree on the slot indices meeting C, root at the smallest index.

    An edge i -> j (i < j) is allowed only when some vertex of C in R_i lies
    in B_j, which makes the whole of R_j, hence C n R_j, part of pi of that
    vertex.  Children therefore always carry later remainder sets, which is
    exactly what lets their delta functions appear as functional arguments of
    the parent's construction.
    """

    nodes: tuple[int, ...]
    root: int
    edges: tuple[tuple[int, int], ...]

    def children(self, i: int) -> tuple[int, ...]:
        return tuple(b for a, b in self.edges if a == i)


def remainder_tree(g: Mdag, gearing: Gearing, c: Iterable[str]) -> RemainderTree:
    cset = _vset(c)
    if not is_bidirected_connected(g, cset):
        raise NotBidirectedConnectedError(f"{cset} is not bidirected-connected")
    parts = {
        j: _vset(set(r) & set(cset))
        for j, r in enumerate(gearing.remainder_sets)
        if set(r) & set(cset)
    }
    nodes = tuple(sorted(parts))
    root = nodes[0]
    allowed = set()
    for i in nodes:
        for j in nodes:
            if i < j and set(parts[i]) & set(gearing.edge_order[j]):
                allowed.add((i, j))
    # breadth-first arborescence from the root over the allowed edges
    parent_of: dict[int, int] = {}
    reached = {root}
    frontier = [root]
    while frontier:
        nxt: list[int] = []
        for i in sorted(frontier):
            for j in nodes:
                if j not in reached and (i, j) in allowed:
                    parent_of[j] = i
                    reached.add(j)
                    nxt.append(j)
        frontier = nxt
    if reached != set(nodes):
        raise NotBidirectedConnectedError(
            f"slots {sorted(set(nodes) - reached)} unreachable in remainder tree"
        )
    edges = tuple(sorted((p, ch) for ch, p in parent_of.items()))
    return RemainderTree(nodes, root, edges)
