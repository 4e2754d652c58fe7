"""Tangent-space verification at the uniform distribution.

The table space over the joint state-space decomposes orthogonally into the
interaction subspaces Lambda_A (tables depending only on x_A with zero sums
along each coordinate of A).  The verifier assembles every first-order
direction the functional model can realize, pools them, and compares the
span against the direct sum of Lambda_A over the parametrizable sets: the
rank must equal the nested-model dimension, every parametrizable set must be
fully covered, and every other set must receive exactly zero component.

Non-geared graphs are handled by pooling directions over geared subgraphs,
one per symmetric-difference witness; mixing two mechanisms vertex-by-vertex
shows any pooled direction is realized by an actual model point, and
:func:`mixture_first_order` implements that construction explicitly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .axes import Axis, canonical_axes, iter_assignments, strides, vertex_axis
from .degenerate import DegenerateFunction, lambda_basis, lambda_dimension, symdiff_decompose
from .errors import NotGearedError, SearchBudgetExceededError, ShapeMismatchError
from .functional import (
    ENUMERATION_BUDGET,
    FunctionalEnumeration,
    delta_multi,
    get_enumeration,
)
from .gearing import Gearing, best_gearing, geared_subgraph_for
from .graph import Mdag, VSet, _vset
from .intrinsic import parametrizable_sets, verify_diffsets
from .kernels import DiscreteKernel
from .rank import ExactRowBasis, float_rank

Q = Fraction
FULL_BASIS_LIMIT = 4096
_STATUS_SUBSET_LIMIT = 12


def project_values(
    values: Sequence[Q], axes: tuple[Axis, ...], a: Iterable[str]
) -> list[Q]:
    """Orthogonal projection of a table onto Lambda_A.

    Along each axis in A subtract the axis mean (degeneracy); along each
    axis outside A replace by the axis mean (constancy).  The operators
    commute, are idempotent and symmetric, so their product is the
    orthogonal projector onto Lambda_A.
    """
    aset = set(a)
    vals = list(values)
    st = strides(axes)
    for pos, ax in enumerate(axes):
        new = list(vals)
        for base, assign in enumerate(iter_assignments(axes)):
            if assign[pos] != 0:
                continue
            total = sum(vals[base + k * st[pos]] for k in range(ax.size))
            mean = total / ax.size
            if ax.name in aset:
                for k in range(ax.size):
                    new[base + k * st[pos]] = vals[base + k * st[pos]] - mean
            else:
                for k in range(ax.size):
                    new[base + k * st[pos]] = mean
        vals = new
    return vals


def project_onto_lambda(q: DiscreteKernel, a: Iterable[str]) -> DiscreteKernel:
    """Lambda_A component of a tangent-mode kernel."""
    aset = _vset(a)
    names = set(q.variables)
    if not set(aset) <= names:
        raise ShapeMismatchError(f"{aset} is not inside the kernel scope")
    vals = project_values(q.values, q.axes, aset)
    return DiscreteKernel(q.random_scope, q.fixed_scope, q.cards, tuple(vals), tangent=True)


@dataclass
class TangentReport:
    graph: Mdag
    nested_dimension: int
    achieved_rank: int
    rank_float: int
    per_set_status: dict[VSet, str]
    achieved_from: dict[VSet, tuple[str, ...]]
    mixing_witnesses: tuple[Mdag, ...]
    labeled_rows: list[tuple[str, tuple[Q, ...]]] = field(repr=False, default_factory=list)
    basis_rows: list[tuple[Q, ...]] = field(repr=False, default_factory=list)

    @property
    def axes(self) -> tuple[Axis, ...]:
        g = self.graph
        return canonical_axes(vertex_axis(v, g.card(v)) for v in g.vertices)

    @property
    def missing_sets(self) -> tuple[VSet, ...]:
        return tuple(s for s, st in sorted(self.per_set_status.items()) if st == "missing")

    @property
    def passed(self) -> bool:
        return self.achieved_rank == self.nested_dimension and not self.missing_sets

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        via = ""
        if self.mixing_witnesses:
            n = len(self.mixing_witnesses)
            via = f" (via {n} geared subgraph{'s' if n != 1 else ''})"
        return f"{self.achieved_rank}/{self.nested_dimension}, {verdict}{via}"


def _geared_rows(
    g: Mdag,
    gearing: Gearing,
    budget: int,
    full_basis_limit: int,
    label_prefix: str,
    psets,
) -> list[tuple[str, tuple[Q, ...]]]:
    """Direction rows for one geared graph, labeled by originating slot.

    Slots whose joint function space is small get the complete family of
    perturbation directions (differences of count-matrix rows span the image
    of every zero-sum perturbation); oversized slots fall back to the
    targeted delta constructions, one per parametrizable set that needs them.
    """
    enum = get_enumeration(g, gearing, budget)
    rows: list[tuple[str, tuple[Q, ...]]] = []
    oversized: list[int] = []
    for slot in range(gearing.slots):
        label = f"{label_prefix}T{slot + 1}"
        if enum.slot_sizes[slot] <= full_basis_limit:
            cnt = enum.count_matrix(slot)
            base = cnt[0]
            seen: set[tuple[Q, ...]] = set()
            for r in cnt[1:]:
                row = tuple(Q(x - y) for x, y in zip(r, base))
                if row in seen or not any(row):
                    continue
                seen.add(row)
                rows.append((label, row))
        else:
            oversized.append(slot)
    if oversized:
        for a in psets.sets:
            witness = verify_diffsets(g, a)
            if witness is None:
                continue
            for label, row in _targeted_rows(g, gearing, enum, a, witness, label_prefix):
                rows.append((label, row))
    return rows


def _targeted_rows(
    g: Mdag,
    gearing: Gearing,
    enum: FunctionalEnumeration,
    a: VSet,
    witness,
    label_prefix: str,
) -> list[tuple[str, tuple[Q, ...]]]:
    """Directions spanning Lambda_A from the delta chain of one witness."""
    parts_by_slot: dict[int, set[str]] = {}
    for v, a_v in witness.parts:
        slot = gearing.r_of(v)
        parts_by_slot.setdefault(slot, set())
        parts_by_slot[slot] ^= set(a_v)
    lambdas_axes = {
        i: canonical_axes(vertex_axis(v, g.card(v)) for v in sorted(s))
        for i, s in parts_by_slot.items()
    }
    slots = sorted(parts_by_slot)
    out = []
    cards = g.cardinalities
    for lam in lambda_basis(cards, a):
        pieces = symdiff_decompose(lam, [lambdas_axes[i] for i in slots])
        root_delta: DegenerateFunction | None = None
        root_slot = None
        for chain in pieces:
            result = delta_multi(g, gearing, witness.connected_set, dict(zip(slots, chain)))
            root_slot = result.root_slot
            d = result.root_delta
            root_delta = d if root_delta is None else root_delta + d
        if root_delta is None or root_slot is None:
            continue
        vec = enum.expand_eps(root_slot, root_delta)
        row = tuple(enum.raw_direction(root_slot, vec))
        out.append((f"{label_prefix}T{root_slot + 1}", row))
    return out


def achievable_directions(
    g: Mdag,
    *,
    budget: int = ENUMERATION_BUDGET,
    full_basis_limit: int = FULL_BASIS_LIMIT,
) -> TangentReport:
    """Assemble every realizable first-order direction and audit the span.

    For geared graphs the model is enumerated under its cheapest gearing; a
    non-geared graph is covered by geared subgraphs, one per witness of each
    parametrizable set, and their directions are pooled.
    """
    psets = parametrizable_sets(g)
    from .intrinsic import model_dimension

    nested_dim = model_dimension(g)
    axes = canonical_axes(vertex_axis(v, g.card(v)) for v in g.vertices)
    witnesses: tuple[Mdag, ...] = ()

    labeled: list[tuple[str, tuple[Q, ...]]] = []
    gearing = best_gearing(g)
    if gearing is not None:
        labeled = _geared_rows(g, gearing, budget, full_basis_limit, "", psets)
    else:
        by_edges: dict[tuple, Mdag] = {}
        for a in psets.sets:
            w = verify_diffsets(g, a)
            if w is None:
                raise SearchBudgetExceededError(f"no witness for parametrizable {a}")
            sub = geared_subgraph_for(g, w.connected_set)
            by_edges.setdefault(sub.bidirected_edges, sub)
        subs = [by_edges[k] for k in sorted(by_edges)]
        witnesses = tuple(subs)
        for gi, sub in enumerate(subs):
            sub_gearing = best_gearing(sub)
            if sub_gearing is None:
                raise NotGearedError("spanning-tree subgraph failed to gear")
            sub_psets = parametrizable_sets(sub)
            labeled.extend(
                _geared_rows(sub, sub_gearing, budget, full_basis_limit, f"G{gi + 1}:", sub_psets)
            )

    pool = ExactRowBasis(_table_size(axes))
    for _, row in labeled:
        pool.add(row)
    achieved_rank = pool.rank
    rank_f = float_rank([row for _, row in labeled]) if labeled else 0

    label_rows: dict[str, list[tuple[Q, ...]]] = {}
    for label, row in labeled:
        label_rows.setdefault(label, []).append(row)

    per_set_status: dict[VSet, str] = {}
    achieved_from: dict[VSet, tuple[str, ...]] = {}
    cards = g.cardinalities
    all_vertices = g.vertices
    if len(all_vertices) <= _STATUS_SUBSET_LIMIT:
        candidates = []
        for r in range(len(all_vertices) + 1):
            candidates.extend(_vset(c) for c in itertools.combinations(all_vertices, r))
    else:
        candidates = list(psets.sets)
    for s in candidates:
        if s not in psets.sets:
            per_set_status[s] = "excluded"
            continue
        want = lambda_dimension(cards, s)
        emb = _embedded_lambda_basis(cards, axes, s)
        got = _rank_against_basis(pool.rows, emb)
        per_set_status[s] = "achieved" if got == want else "missing"
        froms = []
        for label in sorted(label_rows):
            if _rank_against_basis(label_rows[label], emb) == want:
                froms.append(label)
        achieved_from[s] = tuple(froms)

    return TangentReport(
        graph=g,
        nested_dimension=nested_dim,
        achieved_rank=achieved_rank,
        rank_float=rank_f,
        per_set_status=per_set_status,
        achieved_from=achieved_from,
        mixing_witnesses=witnesses,
        labeled_rows=labeled,
        basis_rows=[tuple(r) for r in pool.rows],
    )


def _table_size(axes: tuple[Axis, ...]) -> int:
    n = 1
    for a in axes:
        n *= a.size
    return n


def _embedded_lambda_basis(
    cards: Mapping[str, int], axes: tuple[Axis, ...], a: VSet
) -> list[tuple[Q, ...]]:
    """Basis vectors of Lambda_A broadcast onto the full table grid."""
    return [b.extend_to(axes).values for b in lambda_basis(cards, a)]


def _rank_against_basis(
    rows: Iterable[Sequence[Q]], emb: Sequence[Sequence[Q]]
) -> int:
    """Dimension of the Lambda_A component of span(rows).

    The orthogonal projection of a vector onto Lambda_A is an invertible
    linear image of its inner products with any basis of Lambda_A, so the
    rank of the inner-product matrix equals the projected rank.
    """
    if not emb:
        return 0
    acc = ExactRowBasis(len(emb))
    for r in rows:
        acc.add([_dot(r, b) for b in emb])
        if acc.rank == len(emb):
            break
    return acc.rank


def _dot(u: Sequence[Q], v: Sequence[Q]) -> Q:
    return sum(x * y for x, y in zip(u, v) if x and y)


@dataclass
class ExclusionReport:
    per_set_max: dict[VSet, Q]
    checked_directions: int

    @property
    def max_violation(self) -> Q:
        return max(self.per_set_max.values(), default=Q(0))

    @property
    def all_zero(self) -> bool:
        return self.max_violation == 0


def verify_exclusions(g: Mdag, report: TangentReport | None = None, **kwargs) -> ExclusionReport:
    """Check every achievable direction has zero component in each excluded set.

    Every pooled direction row is projected literally onto every Lambda_B
    with B outside the parametrizable family; in rational mode the maxima
    are exact.
    """
    if report is None:
        report = achievable_directions(g, **kwargs)
    axes = report.axes
    cards = g.cardinalities
    excluded = [s for s, st in report.per_set_status.items() if st == "excluded"]
    per_set: dict[VSet, Q] = {}
    for b in excluded:
        worst = Q(0)
        for emb in _embedded_lambda_basis(cards, axes, b):
            norm_sq = _dot(emb, emb)
            for _, row in report.labeled_rows:
                coeff = abs(_dot(row, emb)) / norm_sq
                if coeff > worst:
                    worst = coeff
        per_set[b] = worst
    return ExclusionReport(per_set, len(report.labeled_rows))


# -- explicit mixture of two mechanisms (validation of direction pooling) ----


def _agreement_margins(
    enum: FunctionalEnumeration, slot: int, delta: DegenerateFunction, eta: Q
) -> dict[tuple[VSet, tuple[int, ...]], Q]:
    """m(B, z) = P(f agrees with z on B) under weights 1 + eta * delta on one slot.

    Agreement of f with z at v means f_v evaluates to z_v when its observed
    arguments are read off z and its functional arguments off f itself.
    """
    g = enum.g
    if g.fixed_vertices:
        raise ShapeMismatchError("mixture check supports graphs without fixed vertices")
    eps_vec = enum.expand_eps(slot, delta)
    z_axes = enum.x_axes
    z_list = list(iter_assignments(z_axes))
    names = [a.name for a in z_axes]
    verts = list(g.random_vertices)
    out: dict[tuple[VSet, tuple[int, ...]], Q] = {}
    weights = [1 + eta * eps_vec[si] for si in enum.slot_index[slot]]
    total = sum(weights)

    agree_sets = []
    ranges = [range(enum.descriptors[v].size) for v in enum.avec_vertices]
    from .axes import index_of
    from .functional import _input_axes

    cell_plans = {}
    for v in verts:
        desc = enum.descriptors[v]
        axes = _input_axes(g, enum.gearing, desc)
        st = strides(axes)
        plan = []
        for a, s in zip(axes, st):
            if a.functional:
                plan.append(("f", enum._pos[a.name], s))
            else:
                plan.append(("z", names.index(a.name), s))
        cell_plans[v] = plan
    for aidx, avec in enumerate(itertools.product(*ranges)):
        per_z = []
        for z in z_list:
            agree = []
            for v in verts:
                cell = 0
                for kind, ref, s in cell_plans[v]:
                    cell += (avec[ref] if kind == "f" else z[ref]) * s
                if enum.outputs_of[v][avec[enum._pos[v]]][cell] == z[names.index(v)]:
                    agree.append(v)
            per_z.append(frozenset(agree))
        agree_sets.append(per_z)

    for b_size in range(len(verts) + 1):
        for b in itertools.combinations(verts, b_size):
            bset = frozenset(b)
            for zi, z in enumerate(z_list):
                acc = Q(0)
                for aidx in range(enum.total):
                    if bset <= agree_sets[aidx][zi]:
                        acc += weights[aidx]
                out[(_vset(b), z)] = acc / total
    return out


def mixture_first_order(
    g: Mdag,
    sub1: Mdag,
    sub2: Mdag,
    a1: VSet,
    a2: VSet,
    eta: Q = Q(1, 100),
    budget: int = ENUMERATION_BUDGET,
) -> tuple[DiscreteKernel, DiscreteKernel]:
    """Mix one mechanism per subgraph and extract the exact first-order term.

    Each subgraph contributes a perturbed functional model realizing a
    Lambda_{a_i} direction; drawing an independent fair coin per vertex to
    pick which mechanism generates it yields a distribution of the full
    model whose expansion in eta is computed exactly.  Returns the mixed
    kernel at +eta and the exact first-order direction, which must have
    nonzero components exactly at a1 and a2.
    """
    def perturbed(sub: Mdag, a: VSet):
        gearing = best_gearing(sub)
        if gearing is None:
            raise NotGearedError("mixture components must be geared")
        enum = get_enumeration(sub, gearing, budget)
        w = verify_diffsets(sub, a)
        if w is None:
            raise ShapeMismatchError(f"{a} is not parametrizable in the subgraph")
        parts_by_slot: dict[int, set[str]] = {}
        for v, a_v in w.parts:
            slot = gearing.r_of(v)
            parts_by_slot.setdefault(slot, set())
            parts_by_slot[slot] ^= set(a_v)
        slots = sorted(parts_by_slot)
        lam = lambda_basis(sub.cardinalities, a)[0]
        axes_per_slot = [
            canonical_axes(vertex_axis(v, sub.card(v)) for v in sorted(parts_by_slot[i]))
            for i in slots
        ]
        root_delta = None
        root_slot = None
        for chain in symdiff_decompose(lam, axes_per_slot):
            res = delta_multi(sub, gearing, w.connected_set, dict(zip(slots, chain)))
            root_slot = res.root_slot
            root_delta = res.root_delta if root_delta is None else root_delta + res.root_delta
        if root_delta is None or root_slot is None:
            raise ShapeMismatchError(f"no delta chain produced for {a}")
        return enum, root_slot, root_delta

    enum1, slot1, delta1 = perturbed(sub1, a1)
    enum2, slot2, delta2 = perturbed(sub2, a2)
    verts = g.random_vertices
    n_v = len(verts)

    def mix_values(eta_val: Q) -> list[Q]:
        m1 = _agreement_margins(enum1, slot1, delta1, eta_val)
        m2 = _agreement_margins(enum2, slot2, delta2, eta_val)
        z_axes = canonical_axes(vertex_axis(v, g.card(v)) for v in verts)
        vals = []
        for z in iter_assignments(z_axes):
            acc = Q(0)
            for r in range(n_v + 1):
                for b in itertools.combinations(verts, r):
                    comp = _vset(set(verts) - set(b))
                    acc += m1[(_vset(b), z)] * m2[(comp, z)]
            vals.append(acc / (2 ** n_v))
        return vals

    plus = mix_values(eta)
    minus = mix_values(-eta)
    direction = [(p - m) / (2 * eta) for p, m in zip(plus, minus)]
    mixed = DiscreteKernel(verts, (), g.cards, tuple(plus)).validate()
    dkernel = DiscreteKernel(verts, (), g.cards, tuple(direction), tangent=True)
    return mixed, dkernel
