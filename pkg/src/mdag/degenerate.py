"""Degenerate functions over finite axes and their decomposition algebra.

A table is degenerate on its scope when summing it along any one of its axes
(everything else fixed) gives zero.  For a scope A over variable axes these
are exactly the Lambda_A tables: they depend only on x_A and have zero sums
in each coordinate of A, and the spaces Lambda_A for distinct A are mutually
orthogonal with dim Lambda_A = prod_a (|X_a| - 1).

Everything here is exact: values are rationals throughout, and the eta
kernels used for symmetric-difference splits are represented unnormalized
next to their squared scale so all identities are checked in Q.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .axes import Axis, AxisKey, canonical_axes, index_of, iter_assignments, product_size, strides, vertex_axis
from .errors import BadPartitionError, NotDegenerateError, ShapeMismatchError

Q = Fraction


@dataclass(frozen=True)
class DegenerateFunction:
    """A flat rational table over canonically ordered axes.

    Degeneracy (zero sums along every axis) is the caller's contract; use
    :meth:`is_degenerate` or :meth:`check_degenerate` to verify it exactly.
    """

    axes: tuple[Axis, ...]
    values: tuple[Q, ...]

    @staticmethod
    def from_table(axes: Iterable[Axis], values: Sequence[Q | int]) -> "DegenerateFunction":
        ax = canonical_axes(axes)
        vals = tuple(Q(v) for v in values)
        if len(vals) != product_size(ax):
            raise ShapeMismatchError(
                f"table of length {len(vals)} for axes of size {product_size(ax)}"
            )
        return DegenerateFunction(ax, vals)

    @staticmethod
    def constant(value: Q | int = 1) -> "DegenerateFunction":
        return DegenerateFunction((), (Q(value),))

    @property
    def keys(self) -> frozenset[AxisKey]:
        return frozenset(a.key for a in self.axes)

    def value_at(self, assignment: Mapping[AxisKey, int]) -> Q:
        return self.values[index_of(self.axes, assignment)]

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def is_degenerate(self) -> bool:
        st = strides(self.axes)
        for pos, a in enumerate(self.axes):
            for base, assign in enumerate(iter_assignments(self.axes)):
                if assign[pos] != 0:
                    continue
                total = sum(
                    self.values[base + k * st[pos]] for k in range(a.size)
                )
                if total != 0:
                    return False
        return True

    def check_degenerate(self) -> "DegenerateFunction":
        if not self.is_degenerate():
            raise NotDegenerateError(f"table over {self.axes} has a nonzero axis sum")
        return self

    def scale(self, c: Q | int) -> "DegenerateFunction":
        c = Q(c)
        return DegenerateFunction(self.axes, tuple(v * c for v in self.values))

    def __add__(self, other: "DegenerateFunction") -> "DegenerateFunction":
        if self.axes != other.axes:
            raise ShapeMismatchError("adding tables over different axes")
        return DegenerateFunction(
            self.axes, tuple(a + b for a, b in zip(self.values, other.values))
        )

    def pointwise_mul(self, other: "DegenerateFunction") -> "DegenerateFunction":
        """Product as functions on the union of the two scopes."""
        union = canonical_axes(set(self.axes) | set(other.axes))
        out = []
        for assign in iter_assignments(union):
            env = {a.key: v for a, v in zip(union, assign)}
            out.append(self.value_at(env) * other.value_at(env))
        return DegenerateFunction(union, tuple(out))

    def outer(self, other: "DegenerateFunction") -> "DegenerateFunction":
        if self.keys & other.keys:
            raise ShapeMismatchError("outer product requires disjoint axes")
        return self.pointwise_mul(other)

    def extend_to(self, axes: Iterable[Axis]) -> "DegenerateFunction":
        """Broadcast constantly onto a superset of axes."""
        target = canonical_axes(axes)
        if not self.keys <= frozenset(a.key for a in target):
            raise ShapeMismatchError("extend_to target must contain the scope")
        out = []
        for assign in iter_assignments(target):
            env = {a.key: v for a, v in zip(target, assign)}
            out.append(self.value_at(env))
        return DegenerateFunction(target, tuple(out))

    def project_degenerate(self) -> "DegenerateFunction":
        """Orthogonal projection onto the degenerate subspace of the scope."""
        vals = list(self.values)
        st = strides(self.axes)
        for pos, a in enumerate(self.axes):
            new = list(vals)
            for base, assign in enumerate(iter_assignments(self.axes)):
                if assign[pos] != 0:
                    continue
                mean = sum(vals[base + k * st[pos]] for k in range(a.size)) / a.size
                for k in range(a.size):
                    new[base + k * st[pos]] -= mean
            vals = new
        return DegenerateFunction(self.axes, tuple(Q(v) for v in vals))


def degenerate_basis(axes: Iterable[Axis]) -> list[DegenerateFunction]:
    """Reference-state basis of the degenerate tables on the given axes.

    One basis vector per choice of a nonzero state on each axis: the product
    of per-axis contrasts taking +1 at state 0, -1 at the chosen state, and 0
    elsewhere.  For no axes this degenerates to the constant 1.
    """
    ax = canonical_axes(axes)
    if not ax:
        return [DegenerateFunction.constant(1)]
    basis = []
    for zs in itertools.product(*(range(1, a.size) for a in ax)):
        vals = []
        for assign in iter_assignments(ax):
            term = Q(1)
            for x, z in zip(assign, zs):
                if x == 0:
                    pass
                elif x == z:
                    term = -term
                else:
                    term = Q(0)
                    break
            vals.append(term)
        basis.append(DegenerateFunction(ax, tuple(vals)))
    return basis


def lambda_basis(cards: Mapping[str, int], a: Iterable[str]) -> list[DegenerateFunction]:
    """Basis of Lambda_A over variable axes, of size prod_{v in A}(|X_v| - 1)."""
    return degenerate_basis([vertex_axis(v, cards[v]) for v in a])


def lambda_dimension(cards: Mapping[str, int], a: Iterable[str]) -> int:
    n = 1
    for v in a:
        n *= cards[v] - 1
    return n


@dataclass(frozen=True)
class EtaFamily:
    """The contrast kernels eta_D(. ; y) = alpha^(-1/2) prod_d (|X_d| 1{x_d = y_d} - 1).

    With alpha = prod_d |X_d| (|X_d| - 1) this is the unique scale for which
    both sum_x eta = 0 and sum_y eta(x; y)^2 = 1 hold.  The family is stored
    unnormalized next to alpha^2's value ``alpha_sq`` ( = alpha ), so both
    identities are checked exactly in Q: the squared normalization reads
    sum_y unnormalized(x; y)^2 == alpha_sq.
    """

    axes: tuple[Axis, ...]
    alpha_sq: int

    def unnormalized(self, y: Sequence[int]) -> DegenerateFunction:
        if len(y) != len(self.axes):
            raise ShapeMismatchError("reference point has wrong arity")
        vals = []
        for assign in iter_assignments(self.axes):
            term = Q(1)
            for a, x, yv in zip(self.axes, assign, y):
                term *= a.size * (1 if x == yv else 0) - 1
            vals.append(term)
        return DegenerateFunction(self.axes, tuple(vals))

    def reference_points(self) -> Iterable[tuple[int, ...]]:
        return iter_assignments(self.axes)

    def normalized_floats(self, y: Sequence[int]) -> list[float]:
        scale = self.alpha_sq ** -0.5
        return [float(v) * scale for v in self.unnormalized(y).values]


def eta_functions(cards_or_axes: Mapping[str, int] | Iterable[Axis], d: Iterable[str] | None = None) -> EtaFamily:
    """Family of contrast kernels over the axes of D (or of explicit axes)."""
    if d is not None:
        cards = cards_or_axes  # type: ignore[assignment]
        axes = canonical_axes(vertex_axis(v, cards[v]) for v in d)  # type: ignore[index]
    else:
        axes = canonical_axes(cards_or_axes)  # type: ignore[arg-type]
    if not axes:
        raise ShapeMismatchError("eta family needs a nonempty scope")
    alpha_sq = 1
    for a in axes:
        alpha_sq *= a.size * (a.size - 1)
    return EtaFamily(axes, alpha_sq)


def _split_axes(lam: DegenerateFunction, left: Iterable[Axis], right: Iterable[Axis]) -> tuple[tuple[Axis, ...], tuple[Axis, ...]]:
    la = canonical_axes(left)
    ra = canonical_axes(right)
    if {a.key for a in la} & {a.key for a in ra}:
        raise ShapeMismatchError("left and right axes must be disjoint")
    if canonical_axes(set(la) | set(ra)) != lam.axes:
        raise ShapeMismatchError("left and right axes must partition the scope")
    return la, ra


def rank_one_decompose(
    lam: DegenerateFunction, left: Iterable[Axis], right: Iterable[Axis]
) -> list[tuple[DegenerateFunction, DegenerateFunction]]:
    """Write a degenerate table on disjoint A u B as a sum of degenerate products.

    Exact rank factorization of the A x B matrix, followed by the orthogonal
    projection of every factor onto its degenerate subspace; the projection
    leaves the sum unchanged because lam has zero sums along every axis.
    """
    lam.check_degenerate()
    la, ra = _split_axes(lam, left, right)
    nl, nr = product_size(la), product_size(ra)
    joint = canonical_axes(set(la) | set(ra))
    m = [[Q(0)] * nr for _ in range(nl)]
    l_assigns = list(iter_assignments(la))
    r_assigns = list(iter_assignments(ra))
    for i, al in enumerate(l_assigns):
        env = {a.key: v for a, v in zip(la, al)}
        for j, ar in enumerate(r_assigns):
            env.update({a.key: v for a, v in zip(ra, ar)})
            m[i][j] = lam.value_at(env)

    terms: list[tuple[DegenerateFunction, DegenerateFunction]] = []
    for _ in range(min(nl, nr)):
        pivot = next(
            ((i, j) for i in range(nl) for j in range(nr) if m[i][j] != 0), None
        )
        if pivot is None:
            break
        pi, pj = pivot
        col = [m[i][pj] for i in range(nl)]
        row = [m[pi][j] / m[pi][pj] for j in range(nr)]
        for i in range(nl):
            if col[i] == 0:
                continue
            for j in range(nr):
                m[i][j] -= col[i] * row[j]
        u = DegenerateFunction(la, tuple(col)).project_degenerate()
        v = DegenerateFunction(ra, tuple(row)).project_degenerate()
        if not (u.is_zero() or v.is_zero()):
            terms.append((u, v))

    recon = DegenerateFunction(joint, tuple(Q(0) for _ in range(nl * nr)))
    for u, v in terms:
        recon = recon + u.outer(v)
    if recon.values != lam.extend_to(joint).values:
        raise NotDegenerateError("rank-one decomposition failed to reconstruct")
    return terms


def diff2_decompose(
    lam: DegenerateFunction, left: Iterable[Axis], right: Iterable[Axis]
) -> list[tuple[DegenerateFunction, DegenerateFunction]]:
    """Split a table degenerate on A symdiff B into degenerate A- and B-factors.

    The shared axes D = A n B enter through eta-kernel pairs: each rank-one
    term over (A \\ B, B \\ A) is multiplied by eta(. ; y) on both sides for
    every reference point y, with the 1/alpha scale carried entirely by the
    left factor so that all values stay rational.
    """
    la = canonical_axes(left)
    ra = canonical_axes(right)
    lkeys = {a.key for a in la}
    rkeys = {a.key for a in ra}
    shared = canonical_axes(a for a in la if a.key in rkeys)
    lonly = canonical_axes(a for a in la if a.key not in rkeys)
    ronly = canonical_axes(a for a in ra if a.key not in lkeys)
    if canonical_axes(set(lonly) | set(ronly)) != lam.axes:
        raise BadPartitionError("scope must equal the symmetric difference of the parts")
    base = rank_one_decompose(lam, lonly, ronly)
    if not shared:
        return base
    eta = eta_functions(shared)
    scale = Q(1, eta.alpha_sq)
    out = []
    for u, v in base:
        for y in eta.reference_points():
            k = eta.unnormalized(y)
            out.append((u.outer(k.scale(scale)), v.outer(k)))
    return out


def symdiff_decompose(
    lam: DegenerateFunction, parts: Sequence[Iterable[Axis]]
) -> list[tuple[DegenerateFunction, ...]]:
    """Write lam as a finite sum of products of per-part degenerate tables.

    ``parts`` are axis sets whose symmetric difference equals the scope of
    lam; repeated pairwise splits peel one part off at a time.  The result is
    verified by exact re-expansion as functions on the union of the parts.
    """
    part_axes = [canonical_axes(p) for p in parts]
    sym: set[Axis] = set()
    for pa in part_axes:
        sym ^= set(pa)
    if canonical_axes(sym) != lam.axes:
        raise BadPartitionError(
            f"symmetric difference of parts is {canonical_axes(sym)}, scope is {lam.axes}"
        )
    lam.check_degenerate()

    def rec(cur: DegenerateFunction, remaining: list[tuple[Axis, ...]]) -> list[tuple[DegenerateFunction, ...]]:
        if len(remaining) == 1:
            if cur.axes != remaining[0]:
                raise BadPartitionError("leftover scope does not match final part")
            return [(cur,)]
        rest: set[Axis] = set()
        for pa in remaining[1:]:
            rest ^= set(pa)
        out: list[tuple[DegenerateFunction, ...]] = []
        for head, tail in diff2_decompose(cur, remaining[0], canonical_axes(rest)):
            for chain in rec(tail, remaining[1:]):
                out.append((head, *chain))
        return out

    terms = rec(lam, part_axes)

    union = canonical_axes(set().union(*part_axes)) if part_axes else ()
    recon = DegenerateFunction(union, tuple(Q(0) for _ in range(product_size(union))))
    for chain in terms:
        prod = DegenerateFunction.constant(1)
        for f in chain:
            prod = prod.pointwise_mul(f)
        recon = recon + prod.extend_to(union)
    if recon.values != lam.extend_to(union).values:
        raise BadPartitionError("symmetric-difference decomposition failed to reconstruct")
    return terms
