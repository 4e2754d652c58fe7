"""Functional latent-variable models driven by a gearing.

Each vertex owns a lookup table f_v indexed by the states of its observed
parents and by the function choices of its pi-arguments, and the structural
equations X_v = f_v(f_pi(v), X_pa(v)) turn a joint choice of tables into a
joint outcome.  Drawing the tables of each remainder set from a weight table
rho_i and summing out everything yields the induced conditional kernel

    P[rho_k, ..., rho_1](x_V | x_W),

computed here by exact enumeration of all assignments.  Perturbing one slot
by a degenerate table and differentiating gives the achievable first-order
directions; the delta constructions translate target directions on the
observed scale into slot perturbations realizing them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .axes import (
    Axis,
    canonical_axes,
    function_axis,
    index_of,
    iter_assignments,
    strides,
    vertex_axis,
)
from .degenerate import DegenerateFunction, diff2_decompose
from .errors import (
    BadScopesError,
    EnumerationBudgetExceededError,
    NotDegenerateError,
    ShapeMismatchError,
)
from .gearing import Gearing, FunctionSpaceDescriptor, RemainderTree, function_space, remainder_tree
from .graph import Mdag, VSet, _vset, parents, sterile, topological_order
from .kernels import DiscreteKernel

Q = Fraction
ENUMERATION_BUDGET = 10_000_000
_TABLE_MEMORY_GUARD = 50_000_000


def _input_axes(g: Mdag, gearing: Gearing, desc: FunctionSpaceDescriptor) -> tuple[Axis, ...]:
    """Cell axes of a lookup table: observed parents first, then pi-arguments."""
    obs = [vertex_axis(p, g.card(p)) for p in desc.observed_args]
    fun = [function_axis(w, function_space(g, gearing, w).size) for w in desc.functional_args]
    return canonical_axes(obs + fun)


@dataclass(frozen=True)
class FunctionTable:
    """One concrete function: output value per input cell, plus its flat index."""

    descriptor: FunctionSpaceDescriptor
    outputs: tuple[int, ...]

    @property
    def index(self) -> int:
        idx = 0
        for out in self.outputs:
            idx = idx * self.descriptor.output_cardinality + out
        return idx

    @staticmethod
    def from_index(desc: FunctionSpaceDescriptor, idx: int) -> "FunctionTable":
        if not 0 <= idx < desc.size:
            raise ShapeMismatchError(f"function index {idx} out of range for {desc.vertex}")
        digits = []
        for _ in range(desc.input_cells):
            digits.append(idx % desc.output_cardinality)
            idx //= desc.output_cardinality
        return FunctionTable(desc, tuple(reversed(digits)))


@dataclass(frozen=True)
class FunctionAssignment:
    """A full tuple of lookup tables, one per random vertex."""

    tables: tuple[tuple[str, FunctionTable], ...]

    @staticmethod
    def from_mapping(m: Mapping[str, FunctionTable]) -> "FunctionAssignment":
        return FunctionAssignment(tuple(sorted(m.items())))

    def table(self, v: str) -> FunctionTable:
        return dict(self.tables)[v]


@dataclass(frozen=True)
class RhoTable:
    """Nonnegative weights over the joint function index of one remainder set."""

    slot: int
    weights: tuple[Q, ...]

    def validate(self, size: int) -> "RhoTable":
        if len(self.weights) != size:
            raise ShapeMismatchError(
                f"slot {self.slot} expects {size} weights, got {len(self.weights)}"
            )
        if any(w < 0 for w in self.weights):
            raise ShapeMismatchError(f"slot {self.slot} has a negative weight")
        if all(w == 0 for w in self.weights):
            raise ShapeMismatchError(f"slot {self.slot} weights are all zero")
        return self


def evaluate_structural(
    g: Mdag, gearing: Gearing, assignment: FunctionAssignment, x_w: Mapping[str, int]
) -> dict[str, int]:
    """Evaluate X_v = f_v(f_pi(v), X_pa(v)) for all v, given the fixed context."""
    if set(x_w) != set(g.fixed_vertices):
        raise ShapeMismatchError(f"context must assign exactly {g.fixed_vertices}")
    for w, val in x_w.items():
        if not 0 <= val < g.card(w):
            raise ShapeMismatchError(f"context value {w}={val} out of range")
    values: dict[str, int] = dict(x_w)
    for v in topological_order(g):
        table = assignment.table(v)
        desc = table.descriptor
        if len(table.outputs) != desc.input_cells:
            raise ShapeMismatchError(f"table for {v} has wrong cell count")
        axes = _input_axes(g, gearing, desc)
        env: dict[tuple[bool, str], int] = {}
        for a in axes:
            if a.functional:
                env[a.key] = assignment.table(a.name).index
            else:
                env[a.key] = values[a.name]
        values[v] = table.outputs[index_of(axes, env)]
    return {v: values[v] for v in g.random_vertices}


class FunctionalEnumeration:
    """Exact enumeration of every function assignment of a geared model.

    Assignments are indexed in mixed radix over the slots in gearing order
    (last slot fastest), and within a slot over its vertices in sorted order
    (last vertex fastest); the same convention orders rho tables and joint
    function indices, so fixtures are portable.
    """

    def __init__(self, g: Mdag, gearing: Gearing, budget: int = ENUMERATION_BUDGET):
        if gearing.graph != g:
            raise ShapeMismatchError("gearing belongs to a different graph")
        self.g = g
        self.gearing = gearing
        self.descriptors = {v: function_space(g, gearing, v) for v in g.random_vertices}
        log_total = sum(d.log2_size for d in self.descriptors.values())
        if log_total > math.log2(budget) + 1:
            raise EnumerationBudgetExceededError(
                f"about 2^{log_total:.1f} assignments exceed the budget of {budget}"
            )
        total = 1
        for d in self.descriptors.values():
            total *= d.size
        if total > budget:
            raise EnumerationBudgetExceededError(
                f"{total} assignments exceed the budget of {budget}"
            )
        self.total = total

        self.slot_vertices: list[VSet] = [r for r in gearing.remainder_sets]
        self.slot_sizes: list[int] = []
        for r in self.slot_vertices:
            n = 1
            for v in r:
                n *= self.descriptors[v].size
            self.slot_sizes.append(n)

        # flat per-vertex positions, slot-major then sorted within the slot
        self.avec_vertices: list[str] = [v for r in self.slot_vertices for v in r]
        self._pos = {v: i for i, v in enumerate(self.avec_vertices)}

        self.x_axes = canonical_axes(
            vertex_axis(v, g.card(v)) for v in g.vertices
        )
        self.n_x = 1
        for a in self.x_axes:
            self.n_x *= a.size
        self.n_random = 1
        for v in g.random_vertices:
            self.n_random *= g.card(v)

        self._build()

    # -- construction ------------------------------------------------------

    def _build(self) -> None:
        g, gearing = self.g, self.gearing
        mem = sum(d.size * d.input_cells for d in self.descriptors.values())
        if mem > _TABLE_MEMORY_GUARD:
            raise EnumerationBudgetExceededError(f"lookup tables need {mem} cells")
        self.outputs_of: dict[str, list[tuple[int, ...]]] = {}
        for v, desc in self.descriptors.items():
            self.outputs_of[v] = [
                FunctionTable.from_index(desc, i).outputs for i in range(desc.size)
            ]

        w_axes = canonical_axes(vertex_axis(w, g.card(w)) for w in g.fixed_vertices)
        self.w_contexts = [dict(zip((a.name for a in w_axes), vals)) for vals in iter_assignments(w_axes)]
        self.n_w = len(self.w_contexts)

        # evaluation plan: per vertex in topological order, the cell formula
        topo = topological_order(g)
        x_strides = dict(zip((a.name for a in self.x_axes), strides(self.x_axes)))
        plans = []
        for v in topo:
            desc = self.descriptors[v]
            axes = _input_axes(g, gearing, desc)
            st = strides(axes)
            contributions = []
            for a, s in zip(axes, st):
                if a.functional:
                    contributions.append(("f", self._pos[a.name], s))
                elif a.name in g.fixed_vertices:
                    contributions.append(("w", a.name, s))
                else:
                    contributions.append(("v", a.name, s))
            plans.append((v, self._pos[v], contributions))

        slot_strides: list[list[int]] = []
        for r in self.slot_vertices:
            st = [1] * len(r)
            for i in range(len(r) - 2, -1, -1):
                st[i] = st[i + 1] * self.descriptors[r[i + 1]].size
            slot_strides.append(st)

        evalmap = [0] * (self.total * self.n_w)
        slot_index = [[0] * self.total for _ in self.slot_vertices]
        ranges = [range(self.descriptors[v].size) for v in self.avec_vertices]
        outputs_of = self.outputs_of
        for aidx, avec in enumerate(itertools.product(*ranges)):
            for si, (r, st) in enumerate(zip(self.slot_vertices, slot_strides)):
                acc = 0
                for v, s in zip(r, st):
                    acc += avec[self._pos[v]] * s
                slot_index[si][aidx] = acc
            for wi, ctx in enumerate(self.w_contexts):
                xidx = 0
                vals: dict[str, int] = {}
                for w, val in ctx.items():
                    xidx += x_strides[w] * val
                for v, pos, contributions in plans:
                    cell = 0
                    for kind, ref, s in contributions:
                        if kind == "f":
                            cell += avec[ref] * s
                        elif kind == "w":
                            cell += ctx[ref] * s
                        else:
                            cell += vals[ref] * s
                    out = outputs_of[v][avec[pos]][cell]
                    vals[v] = out
                    xidx += x_strides[v] * out
                evalmap[aidx * self.n_w + wi] = xidx
        self.evalmap = evalmap
        self.slot_index = slot_index
        self._cnt_cache: dict[int, list[list[int]]] = {}

    # -- queries -----------------------------------------------------------

    def slot_axes(self, slot: int) -> tuple[Axis, ...]:
        return canonical_axes(
            function_axis(v, self.descriptors[v].size) for v in self.slot_vertices[slot]
        )

    def count_matrix(self, slot: int) -> list[list[int]]:
        """cnt[g][x]: assignments with slot joint index g evaluating to x."""
        if slot not in self._cnt_cache:
            cnt = [[0] * self.n_x for _ in range(self.slot_sizes[slot])]
            sidx = self.slot_index[slot]
            for aidx in range(self.total):
                row = cnt[sidx[aidx]]
                base = aidx * self.n_w
                for wi in range(self.n_w):
                    row[self.evalmap[base + wi]] += 1
            self._cnt_cache[slot] = cnt
        return self._cnt_cache[slot]

    def kernel(self, rhos: Sequence[RhoTable]) -> DiscreteKernel:
        """Exact induced kernel for one weight table per slot."""
        if sorted(r.slot for r in rhos) != list(range(len(self.slot_vertices))):
            raise ShapeMismatchError("need exactly one rho table per slot")
        tables = [None] * len(self.slot_vertices)
        for r in rhos:
            tables[r.slot] = r.validate(self.slot_sizes[r.slot]).weights
        normalizer = 1
        for t in tables:
            normalizer *= sum(t)
        acc = [0] * self.n_x
        slot_index = self.slot_index
        nslots = len(tables)
        for aidx in range(self.total):
            w = tables[0][slot_index[0][aidx]]
            for si in range(1, nslots):
                w = w * tables[si][slot_index[si][aidx]]
            if w == 0:
                continue
            base = aidx * self.n_w
            for wi in range(self.n_w):
                acc[self.evalmap[base + wi]] += w
        values = tuple(Q(a, normalizer) for a in acc)
        return DiscreteKernel(
            self.g.random_vertices, self.g.fixed_vertices, self.g.cards, values
        ).validate()

    def expand_eps(self, slot: int, eps: DegenerateFunction) -> list[Q]:
        """Expand a perturbation on a sub-scope of the slot to the joint index."""
        slot_ax = self.slot_axes(slot)
        keys = {a.key for a in slot_ax}
        if not eps.keys <= keys:
            raise BadScopesError(
                f"perturbation scope {sorted(eps.keys)} not inside slot {slot}"
            )
        for a in eps.axes:
            match = [b for b in slot_ax if b.key == a.key]
            if not match or match[0].size != a.size:
                raise ShapeMismatchError(f"axis {a} does not match slot {slot}")
        eps.check_degenerate()
        out = []
        for assign in iter_assignments(slot_ax):
            env = {a.key: x for a, x in zip(slot_ax, assign)}
            out.append(eps.value_at(env))
        return out

    def raw_direction(self, slot: int, eps_vector: Sequence[Q]) -> list[Q]:
        """Unnormalized direction sum_g eps(g) cnt[g][.], one entry per x."""
        cnt = self.count_matrix(slot)
        if len(eps_vector) != len(cnt):
            raise ShapeMismatchError("perturbation vector has wrong length")
        out = [Q(0)] * self.n_x
        for ev, row in zip(eps_vector, cnt):
            if ev == 0:
                continue
            for x in range(self.n_x):
                if row[x]:
                    out[x] += ev * row[x]
        return out

    def context_of_x(self) -> list[int]:
        """Context index (over the fixed variables) of every combined x index."""
        ctx_axes = canonical_axes(
            vertex_axis(w, self.g.card(w)) for w in self.g.fixed_vertices
        )
        ctx_strides = dict(zip((a.name for a in ctx_axes), strides(ctx_axes)))
        out = []
        for assign in iter_assignments(self.x_axes):
            ci = 0
            for a, val in zip(self.x_axes, assign):
                if a.name in ctx_strides:
                    ci += ctx_strides[a.name] * val
            out.append(ci)
        return out

    def direction_kernel(self, slot: int, eps: DegenerateFunction) -> DiscreteKernel:
        """Exact derivative of the normalized family along 1 + eta * eps in one slot."""
        s_vec = self.raw_direction(slot, self.expand_eps(slot, eps))
        # derivative of (N0 + eta S) / (normalizer + eta sum_ctx S) at eta = 0
        ctx_of_x = self.context_of_x()
        ctx_totals = [Q(0)] * self.n_w
        for xi, ci in enumerate(ctx_of_x):
            ctx_totals[ci] += s_vec[xi]
        values = tuple(
            s / self.total - ctx_totals[ci] / (self.total * self.n_random)
            for s, ci in zip(s_vec, ctx_of_x)
        )
        return DiscreteKernel(
            self.g.random_vertices,
            self.g.fixed_vertices,
            self.g.cards,
            values,
            tangent=True,
        )


@lru_cache(maxsize=8)
def _enumeration_cache(gearing: Gearing, budget: int) -> FunctionalEnumeration:
    return FunctionalEnumeration(gearing.graph, gearing, budget)


def get_enumeration(g: Mdag, gearing: Gearing, budget: int = ENUMERATION_BUDGET) -> FunctionalEnumeration:
    if gearing.graph != g:
        raise ShapeMismatchError("gearing belongs to a different graph")
    return _enumeration_cache(gearing, budget)


def uniform_rhos(g: Mdag, gearing: Gearing) -> list[RhoTable]:
    enum = get_enumeration(g, gearing)
    return [RhoTable(i, tuple(Q(1) for _ in range(n))) for i, n in enumerate(enum.slot_sizes)]


def joint_distribution(
    g: Mdag, gearing: Gearing, rhos: Sequence[RhoTable], budget: int = ENUMERATION_BUDGET
) -> DiscreteKernel:
    """P[rho_k, ..., rho_1]: exact kernel normalized per context."""
    return get_enumeration(g, gearing, budget).kernel(rhos)


def phi_set(
    g: Mdag,
    gearing: Gearing,
    slot: int,
    f_pi: Mapping[str, int | FunctionTable],
    x: Mapping[str, int],
    restrict_to: Iterable[str] | None = None,
) -> tuple[int, ...]:
    """Joint function indices over R_slot consistent with the given outcome.

    ``restrict_to`` plays the role of the constrained set B: only vertices of
    R_slot inside B must evaluate to their x-value; None means all of them.
    """
    r = gearing.remainder_sets[slot]
    b = set(r) if restrict_to is None else set(restrict_to) & set(r)
    fidx: dict[str, int] = {}
    for w, val in f_pi.items():
        fidx[w] = val.index if isinstance(val, FunctionTable) else int(val)
    choices: list[list[int]] = []
    for v in r:
        desc = function_space(g, gearing, v)
        if v not in b:
            choices.append(list(range(desc.size)))
            continue
        axes = _input_axes(g, gearing, desc)
        env: dict[tuple[bool, str], int] = {}
        for a in axes:
            if a.functional:
                if a.name not in fidx:
                    raise ShapeMismatchError(f"missing function index for {a.name}")
                env[a.key] = fidx[a.name]
            else:
                if a.name not in x:
                    raise ShapeMismatchError(f"missing value for {a.name}")
                env[a.key] = x[a.name]
        cell = index_of(axes, env)
        if v not in x:
            raise ShapeMismatchError(f"missing value for {v}")
        target = x[v]
        ok = [
            i
            for i in range(desc.size)
            if FunctionTable.from_index(desc, i).outputs[cell] == target
        ]
        choices.append(ok)
    st = [1] * len(r)
    for i in range(len(r) - 2, -1, -1):
        st[i] = st[i + 1] * function_space(g, gearing, r[i + 1]).size
    out = []
    for combo in itertools.product(*choices):
        out.append(sum(c * s for c, s in zip(combo, st)))
    return tuple(sorted(out))


def directional_derivative(
    g: Mdag, gearing: Gearing, slot: int, eps: DegenerateFunction, budget: int = ENUMERATION_BUDGET
) -> DiscreteKernel:
    """D_slot(eps): exact first-order direction of the induced family."""
    if not 0 <= slot < gearing.slots:
        raise ShapeMismatchError(f"slot {slot} out of range")
    return get_enumeration(g, gearing, budget).direction_kernel(slot, eps)


# -- delta constructions ---------------------------------------------------


def _vertex_scope(axes: Iterable[Axis]) -> VSet:
    return _vset(a.name for a in axes if not a.functional)


def _functional_scope(axes: Iterable[Axis]) -> VSet:
    return _vset(a.name for a in axes if a.functional)


def _delta_singleton(
    g: Mdag, gearing: Gearing, v: str, a: VSet, e: VSet, lam: DegenerateFunction
) -> DegenerateFunction:
    desc = function_space(g, gearing, v)
    axes = _input_axes(g, gearing, desc)
    k = tuple(sorted(set(a) - {v}))
    cells = list(iter_assignments(axes))
    values = []
    for i in range(desc.size):
        outputs = FunctionTable.from_index(desc, i).outputs
        total = Q(0)
        for cell_idx, assign in enumerate(cells):
            env = {(False, v): outputs[cell_idx]}
            for ax, val in zip(axes, assign):
                if ax.functional:
                    if ax.name in e:
                        env[(True, ax.name)] = val
                else:
                    if ax.name in k:
                        env[(False, ax.name)] = val
            total += lam.value_at(env)
        values.append(total)
    return DegenerateFunction((function_axis(v, desc.size),), tuple(values))


def delta_from_lambda(
    g: Mdag,
    gearing: Gearing,
    c: Iterable[str],
    a: Iterable[str],
    e: Iterable[str],
    lam: DegenerateFunction,
) -> tuple[DegenerateFunction, int]:
    """Build delta on F_C whose constrained slot sum reproduces lam.

    Requires C inside one remainder set, sterile(C) <= A <= C u pa(C),
    E <= pi(C), and lam degenerate over the axes of X_A x F_E.  Returns
    (delta, c) with, for Phi the full constraint set of the slot,

        sum_{f in Phi} delta(f_C) = c * lam(x_A, f_E),

    where c = prod over the slot's vertices of |X_v| ** (cells_v - 1).
    Constraining only C keeps the same identity up to the unconstrained
    vertices' factors; dropping any constraint inside C kills the sum.
    """
    cset = _vset(c)
    aset = _vset(a)
    eset = _vset(e)
    if not cset:
        raise BadScopesError("C must be nonempty")
    slots = {gearing.r_of(v) for v in cset}
    if len(slots) != 1:
        raise BadScopesError(f"C spans several remainder sets: {cset}")
    slot = slots.pop()
    if not set(sterile(g, cset)) <= set(aset):
        raise BadScopesError(f"A must contain sterile(C) = {sterile(g, cset)}")
    if not set(aset) <= set(cset) | set(parents(g, cset)):
        raise BadScopesError("A must lie inside C u pa(C)")
    pi_c: set[str] = set()
    for v in cset:
        pi_c |= set(gearing.pi(v))
    if not set(eset) <= pi_c:
        raise BadScopesError(f"E must lie inside pi(C) = {sorted(pi_c)}")
    expected = canonical_axes(
        [vertex_axis(w, g.card(w)) for w in aset]
        + [function_axis(w, function_space(g, gearing, w).size) for w in eset]
    )
    if lam.axes != expected:
        raise BadScopesError(f"lam has axes {lam.axes}, expected {expected}")
    lam.check_degenerate()

    def build(cc: VSet, aa: VSet, ee: VSet, lm: DegenerateFunction) -> DegenerateFunction:
        if len(cc) == 1:
            return _delta_singleton(g, gearing, cc[0], aa, ee, lm)
        w = min(sterile(g, cc))
        c1 = _vset(set(cc) - {w})
        a1 = _vset((set(aa) | set(sterile(g, c1))) & (set(c1) | set(parents(g, c1))))
        a2 = _vset(set(aa) ^ set(a1))
        pi_c1: set[str] = set()
        for u in c1:
            pi_c1 |= set(gearing.pi(u))
        e1 = _vset(set(ee) & pi_c1)
        e2 = _vset(set(ee) - set(e1))
        part1 = canonical_axes(
            [vertex_axis(u, g.card(u)) for u in a1]
            + [function_axis(u, function_space(g, gearing, u).size) for u in e1]
        )
        part2 = canonical_axes(
            [vertex_axis(u, g.card(u)) for u in a2]
            + [function_axis(u, function_space(g, gearing, u).size) for u in e2]
        )
        pieces = diff2_decompose(lm, part1, part2)
        total: DegenerateFunction | None = None
        for lm1, lm2 in pieces:
            d1 = build(c1, a1, e1, lm1)
            d2 = _delta_singleton(g, gearing, w, a2, e2, lm2)
            term = d1.outer(d2)
            total = term if total is None else total + term
        if total is None:
            ax = canonical_axes(
                function_axis(u, function_space(g, gearing, u).size) for u in cc
            )
            total = DegenerateFunction(ax, tuple(Q(0) for _ in iter_assignments(ax)))
        return total

    delta = build(cset, aset, eset, lam)
    const = 1
    for v in gearing.remainder_sets[slot]:
        desc = function_space(g, gearing, v)
        const *= desc.output_cardinality ** (desc.input_cells - 1)
    return delta, const


@dataclass(frozen=True)
class DeltaMultiResult:
    """Per-slot deltas realizing a product of per-slot target directions."""

    root_slot: int
    deltas: tuple[tuple[int, DegenerateFunction], ...]
    tree: RemainderTree
    scale: Q

    def delta(self, slot: int) -> DegenerateFunction:
        return dict(self.deltas)[slot]

    @property
    def root_delta(self) -> DegenerateFunction:
        return self.delta(self.root_slot)


def delta_multi(
    g: Mdag,
    gearing: Gearing,
    c: Iterable[str],
    lambdas: Mapping[int, DegenerateFunction],
) -> DeltaMultiResult:
    """Chain delta constructions down the remainder tree of C.

    ``lambdas[i]`` is a degenerate table over vertex axes A_i with
    sterile(C_i) <= A_i <= C_i u pa(C_i) for C_i = C n R_i.  The root slot's
    delta then realizes the direction prod_i lambda_i scaled by 1/|X_V|:
    perturbing only the root slot by it moves the induced kernel first-order
    along that product.
    """
    cset = _vset(c)
    tree = remainder_tree(g, gearing, cset)
    parts = {
        i: _vset(set(gearing.remainder_sets[i]) & set(cset)) for i in tree.nodes
    }
    if set(lambdas) != set(tree.nodes):
        raise BadScopesError(f"need one lambda per slot in {tree.nodes}")
    for i, lam in lambdas.items():
        ai = _vertex_scope(lam.axes)
        if _functional_scope(lam.axes):
            raise BadScopesError("per-slot lambdas must be over vertex axes only")
        if not set(sterile(g, parts[i])) <= set(ai):
            raise BadScopesError(f"lambda for slot {i} misses sterile(C_{i})")
        if not set(ai) <= set(parts[i]) | set(parents(g, parts[i])):
            raise BadScopesError(f"lambda for slot {i} leaves C_{i} u pa(C_{i})")

    deltas: dict[int, DegenerateFunction] = {}
    for i in sorted(tree.nodes, reverse=True):
        lam_input = lambdas[i]
        ee: list[str] = []
        for j in tree.children(i):
            lam_input = lam_input.outer(deltas[j])
            ee.extend(parts[j])
        delta, _ = delta_from_lambda(g, gearing, parts[i], _vertex_scope(lambdas[i].axes), _vset(ee), lam_input)
        deltas[i] = delta
    return DeltaMultiResult(
        tree.root,
        tuple(sorted(deltas.items())),
        tree,
        Q(1, _random_state_count(g)),
    )


def _random_state_count(g: Mdag) -> int:
    n = 1
    for v in g.random_vertices:
        n *= g.card(v)
    return n
