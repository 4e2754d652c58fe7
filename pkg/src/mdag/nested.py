"""Recursive nested-Markov verification of concrete kernels.

The check follows the recursive definition: a kernel passes for G when it
factorizes over the districts into kernels passing for the district
subgraphs, and when every childless-vertex marginal passes for the graph
with that vertex removed.  District kernels are computed by sequential
conditioning along the canonical topological order (the standard Q
factorization); their product reconstructs any positive kernel exactly, so
the substance of the check is that each district kernel must not depend on
anything outside its declared context, recursively.  The classic example is
the four-variable chain with a long-range confounder, where marginalizing
the second variable out of the {2,4} district kernel must leave a function
independent of the first variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .axes import index_of, iter_assignments, vertex_axis
from .errors import NotADistrictError, ShapeMismatchError, ZeroProbabilityError
from .graph import (
    Mdag,
    VSet,
    _vset,
    children,
    district_subgraph,
    districts,
    parents,
    remove_childless,
    topological_order,
)
from .kernels import DiscreteKernel, kernel_matches_graph

Q = Fraction
DEFAULT_TOL = 1e-9
Step = tuple[str, str]


@dataclass(frozen=True)
class ConstraintViolation:
    """One failed constraint, with the recursion path that exposed it."""

    path: tuple[Step, ...]
    magnitude: float
    description: str

    def __str__(self) -> str:
        steps = " -> ".join(f"{op}[{arg}]" for op, arg in self.path) or "(root)"
        return f"{steps}: {self.description} (deviation {self.magnitude:.3g})"

    def prefixed(self, step: Step) -> "ConstraintViolation":
        return ConstraintViolation((step,) + self.path, self.magnitude, self.description)


def _require_positive(p: DiscreteKernel) -> None:
    if not p.is_strictly_positive():
        raise ZeroProbabilityError("kernel must be strictly positive")


def _conditional(p: DiscreteKernel, v: str, given: Sequence[str]) -> dict[tuple[int, ...], Q]:
    """p(x_v | x_given) keyed by (x_v, *x_given)."""
    axes = p.axes
    names = [a.name for a in axes]
    vi = names.index(v)
    gi = [names.index(w) for w in given]
    joint: dict[tuple[int, ...], Q] = {}
    for assign, value in zip(iter_assignments(axes), p.values):
        key = (assign[vi],) + tuple(assign[i] for i in gi)
        joint[key] = joint.get(key, Q(0)) + value
    margin: dict[tuple[int, ...], Q] = {}
    for key, value in joint.items():
        margin[key[1:]] = margin.get(key[1:], Q(0)) + value
    out = {}
    for key, value in joint.items():
        denom = margin[key[1:]]
        if denom == 0:
            raise ZeroProbabilityError(f"zero margin conditioning {v} on {given}")
        out[key] = value / denom
    return out


def _district_q(
    p: DiscreteKernel, g: Mdag, d: VSet, order: Sequence[str]
) -> tuple[list[Q], list[str]]:
    """Q[D](x) = prod_{v in D} p(x_v | x_pre(v)) over the full variable grid."""
    fixed = sorted(p.fixed_scope)
    axes = p.axes
    factors = []
    for pos, v in enumerate(order):
        if v not in d:
            continue
        given = _vset(set(order[:pos]) | set(fixed))
        factors.append((v, given, _conditional(p, v, given)))
    names = [a.name for a in axes]
    values = []
    for assign in iter_assignments(axes):
        env = dict(zip(names, assign))
        total = Q(1)
        for v, given, table in factors:
            total *= table[(env[v],) + tuple(env[w] for w in given)]
        values.append(total)
    return values, names


def district_factor(
    p: DiscreteKernel, g: Mdag, d: Sequence[str], order: Sequence[str] | None = None
) -> DiscreteKernel:
    """The candidate district kernel g_D(x_D | x_pa(D)\\D).

    Computed by sequential conditioning along a topological order (canonical
    order when ``order`` is None) and then collapsed onto its declared scope
    by averaging over out-of-scope variables; for kernels in the model the
    collapse is a no-op.  Normalization per context is exact by telescoping
    and re-asserted after the collapse.
    """
    _require_positive(p)
    if not kernel_matches_graph(p, g):
        raise ShapeMismatchError("kernel scopes do not match the graph")
    dset = _vset(d)
    if dset not in districts(g):
        raise NotADistrictError(f"{dset} is not a district of the graph")
    topo = list(order) if order is not None else topological_order(g)
    if sorted(topo) != list(g.random_vertices):
        raise ShapeMismatchError("order must enumerate the random vertices")
    q_values, names = _district_q(p, g, dset, topo)

    context = _vset(set(parents(g, dset)) - set(dset))
    scope = _vset(set(dset) | set(context))
    cards = dict(p.cards)
    scope_axes = tuple(vertex_axis(v, cards[v]) for v in scope)
    n_scope = 1
    for a in scope_axes:
        n_scope *= a.size
    sums = [Q(0)] * n_scope
    share = len(q_values) // n_scope
    for assign, value in zip(iter_assignments(p.axes), q_values):
        env = dict(zip(names, assign))
        sums[index_of(scope_axes, {(False, v): env[v] for v in scope})] += value
    collapsed = [s / share for s in sums]

    out = list(collapsed)
    ctx_axes = tuple(vertex_axis(v, cards[v]) for v in context)
    d_axes = tuple(vertex_axis(v, cards[v]) for v in dset)
    for ctx_assign in iter_assignments(ctx_axes):
        ctx_env = dict(zip(context, ctx_assign))
        idxs = []
        for d_assign in iter_assignments(d_axes):
            env = {**ctx_env, **dict(zip(dset, d_assign))}
            idxs.append(index_of(scope_axes, {(False, v): env[v] for v in scope}))
        total = sum(collapsed[i] for i in idxs)
        if total == 0:
            raise ZeroProbabilityError("district kernel lost all mass")
        for i in idxs:
            out[i] = collapsed[i] / total
    new_cards = tuple((v, cards[v]) for v in scope)
    return DiscreteKernel(dset, context, new_cards, tuple(out))


def _dependence_spread(p: DiscreteKernel, g: Mdag, d: VSet, order: Sequence[str]):
    """Exact max spread of Q[D] across variables outside D u pa(D)."""
    q_values, names = _district_q(p, g, d, order)
    scope = set(d) | set(parents(g, d))
    groups: dict[tuple[int, ...], list[Q]] = {}
    for assign, value in zip(iter_assignments(p.axes), q_values):
        key = tuple(x for name, x in zip(names, assign) if name in scope)
        groups.setdefault(key, []).append(value)
    spread = 0
    for vals in groups.values():
        spread = max(spread, max(vals) - min(vals))
    return spread


def nmp_verify(
    p: DiscreteKernel,
    g: Mdag,
    tol: float = DEFAULT_TOL,
    order: Sequence[str] | None = None,
) -> list[ConstraintViolation]:
    """All nested-Markov violations of p with respect to G (empty means pass).

    With rational kernels and ``tol=0`` the verdict is exact.  The recursion
    memoizes on (graph, kernel), so shared subproblems are checked once; the
    optional ``order`` overrides the topological order used for the district
    kernels of the top-level graph (the verdict must not depend on it).
    """
    _require_positive(p)
    if not kernel_matches_graph(p, g):
        raise ShapeMismatchError("kernel scopes do not match the graph")
    memo: dict[tuple, tuple[ConstraintViolation, ...]] = {}

    def recurse(kernel: DiscreteKernel, graph: Mdag) -> tuple[ConstraintViolation, ...]:
        if not graph.random_vertices:
            return ()
        key = (graph, kernel.random_scope, kernel.fixed_scope, kernel.values)
        if key in memo:
            return memo[key]
        found: list[ConstraintViolation] = []
        if order is not None and graph == g:
            topo: list[str] = list(order)
        else:
            topo = topological_order(graph)

        for d in districts(graph):
            step = ("district", ",".join(d))
            spread = _dependence_spread(kernel, graph, d, topo)
            if spread > tol:
                scope = _vset(set(d) | set(parents(graph, d)))
                found.append(
                    ConstraintViolation(
                        (step,),
                        float(spread),
                        f"district kernel for {{{','.join(d)}}} depends on "
                        f"variables outside {{{','.join(scope)}}}",
                    )
                )
                continue
            sub = district_subgraph(graph, d)
            if sub == graph:
                continue
            gi = district_factor(kernel, graph, d, topo)
            found.extend(v.prefixed(step) for v in recurse(gi, sub))

        for v in graph.random_vertices:
            if children(graph, (v,)):
                continue
            step = ("marginalize", v)
            sub = remove_childless(graph, v)
            found.extend(w.prefixed(step) for w in recurse(kernel.marginalize(v), sub))

        result = tuple(found)
        memo[key] = result
        return result

    return list(recurse(p, g))


def verma_check(p: DiscreteKernel, tol: float = DEFAULT_TOL):
    """Max deviation of the post-marginalization invariance on 4 variables.

    For variables a < b < c < d (sorted order) this is the largest change of
    sum_b p(b | a) p(d | a, b, c) as the first argument a varies, all other
    arguments held fixed; it is identically zero under the chain-with-
    confounder model and generically positive otherwise.  ``tol`` is only a
    convenience threshold for the boolean interpretation; the returned value
    is exact for rational kernels.
    """
    _require_positive(p)
    if len(p.random_scope) != 4 or p.fixed_scope:
        raise ShapeMismatchError("verma_check expects 4 random variables")
    a, b, c, d = sorted(p.random_scope)
    cards = dict(p.cards)
    p_b_given_a = _conditional(p, b, (a,))
    p_d_given_abc = _conditional(p, d, (a, b, c))

    def functional(xa: int, xc: int, xd: int) -> Q:
        return sum(
            p_b_given_a[(xb, xa)] * p_d_given_abc[(xd, xa, xb, xc)]
            for xb in range(cards[b])
        )

    worst = 0
    for xc in range(cards[c]):
        for xd in range(cards[d]):
            vals = [functional(xa, xc, xd) for xa in range(cards[a])]
            worst = max(worst, max(vals) - min(vals))
    return worst
