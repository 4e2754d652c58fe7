"""Discrete conditional kernels p(x_V | x_W) and their text file format.

A kernel stores one value per joint configuration of all its variables, laid
out over the lexicographically sorted variable order with the last variable
fastest.  Probability kernels are nonnegative and normalized per context;
tangent-mode kernels hold perturbation vectors and skip those checks.

File format (one value per line after the header)::

    # mdag kernel v1
    random: 2 4
    fixed: 1 3
    cardinalities: 1=2 2=2 3=2 4=2
    order: 1 2 3 4
    values:
    1/4
    ...

Entries are exact rationals ``n/d`` or decimal literals; both parse back to
rationals, so rational round-trips are bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .axes import Axis, index_of, iter_assignments, product_size, vertex_axis
from .errors import ParseError, ShapeMismatchError, ZeroProbabilityError
from .graph import Mdag

Q = Fraction
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteKernel:
    random_scope: tuple[str, ...]
    fixed_scope: tuple[str, ...]
    cards: tuple[tuple[str, int], ...]
    values: tuple[Q, ...]
    tangent: bool = False

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(self.random_scope + self.fixed_scope))

    @property
    def axes(self) -> tuple[Axis, ...]:
        cards = dict(self.cards)
        return tuple(vertex_axis(v, cards[v]) for v in self.variables)

    @property
    def random_axes(self) -> tuple[Axis, ...]:
        cards = dict(self.cards)
        return tuple(vertex_axis(v, cards[v]) for v in sorted(self.random_scope))

    def card(self, v: str) -> int:
        return dict(self.cards)[v]

    def value_at(self, assignment: Mapping[str, int]) -> Q:
        env = {(False, v): x for v, x in assignment.items()}
        return self.values[index_of(self.axes, env)]

    def contexts(self) -> Iterator[dict[str, int]]:
        cards = dict(self.cards)
        fixed = sorted(self.fixed_scope)
        fixed_axes = tuple(vertex_axis(v, cards[v]) for v in fixed)
        for assign in iter_assignments(fixed_axes):
            yield dict(zip(fixed, assign))

    def random_configs(self) -> Iterator[dict[str, int]]:
        for assign in iter_assignments(self.random_axes):
            yield {a.name: x for a, x in zip(self.random_axes, assign)}

    def validate(self) -> "DiscreteKernel":
        if len(self.values) != product_size(self.axes):
            raise ShapeMismatchError("kernel table has the wrong length")
        if self.tangent:
            return self
        for v in self.values:
            if v < 0:
                raise ZeroProbabilityError("negative entry in probability kernel")
        for ctx in self.contexts():
            total = sum(self.value_at({**ctx, **cfg}) for cfg in self.random_configs())
            if abs(total - 1) > NORMALIZATION_TOL:
                raise ShapeMismatchError(f"context {ctx} sums to {total}, not 1")
        return self

    def is_strictly_positive(self) -> bool:
        return all(v > 0 for v in self.values)

    def marginalize(self, v: str) -> "DiscreteKernel":
        """Sum out one random variable."""
        if v not in self.random_scope:
            raise ShapeMismatchError(f"{v!r} is not in the random scope")
        new_rand = tuple(sorted(set(self.random_scope) - {v}))
        new_cards = tuple((w, c) for w, c in self.cards if w != v)
        cards = dict(self.cards)
        new_axes = tuple(vertex_axis(w, cards[w]) for w in sorted(new_rand + self.fixed_scope))
        out = [Q(0)] * product_size(new_axes)
        for assign, value in zip(iter_assignments(self.axes), self.values):
            env = {a.key: x for a, x in zip(self.axes, assign)}
            del env[(False, v)]
            out[index_of(new_axes, env)] += value
        return DiscreteKernel(new_rand, self.fixed_scope, new_cards, tuple(out), self.tangent)


def uniform_kernel(g: Mdag) -> DiscreteKernel:
    """The uniform conditional kernel on G's scopes."""
    n_random = 1
    for v in g.random_vertices:
        n_random *= g.card(v)
    n_total = n_random
    for w in g.fixed_vertices:
        n_total *= g.card(w)
    return DiscreteKernel(
        g.random_vertices,
        g.fixed_vertices,
        g.cards,
        tuple(Q(1, n_random) for _ in range(n_total)),
    )


def kernel_matches_graph(p: DiscreteKernel, g: Mdag) -> bool:
    return (
        tuple(sorted(p.random_scope)) == g.random_vertices
        and tuple(sorted(p.fixed_scope)) == g.fixed_vertices
        and dict(p.cards) == g.cardinalities
    )


def _format_value(v: Q) -> str:
    return str(v)


def write_kernel(p: DiscreteKernel, fh: IO[str]) -> None:
    fh.write("# mdag kernel v1\n")
    fh.write("random: " + " ".join(sorted(p.random_scope)) + "\n")
    fh.write("fixed: " + " ".join(sorted(p.fixed_scope)) + "\n")
    fh.write(
        "cardinalities: " + " ".join(f"{v}={c}" for v, c in sorted(p.cards)) + "\n"
    )
    fh.write("order: " + " ".join(p.variables) + "\n")
    fh.write("values:\n")
    for v in p.values:
        fh.write(_format_value(v) + "\n")


def kernel_to_text(p: DiscreteKernel) -> str:
    import io

    buf = io.StringIO()
    write_kernel(p, buf)
    return buf.getvalue()


def _parse_value(token: str, lineno: int) -> Q:
    try:
        return Q(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"line {lineno}: bad value {token!r}: {exc}") from exc


def read_kernel(fh: IO[str] | Iterable[str], *, tangent: bool = False) -> DiscreteKernel:
    random_scope: tuple[str, ...] | None = None
    fixed_scope: tuple[str, ...] | None = None
    cards: list[tuple[str, int]] = []
    order: tuple[str, ...] | None = None
    values: list[Q] = []
    in_values = False
    for lineno, raw in enumerate(fh, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if in_values:
            values.append(_parse_value(line, lineno))
            continue
        if ":" not in line:
            raise ParseError(f"line {lineno}: expected 'key: value', got {line!r}")
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        if key == "random":
            random_scope = tuple(rest.split())
        elif key == "fixed":
            fixed_scope = tuple(rest.split())
        elif key == "cardinalities":
            for item in rest.split():
                name, _, num = item.partition("=")
                try:
                    cards.append((name, int(num)))
                except ValueError as exc:
                    raise ParseError(f"line {lineno}: bad cardinality {item!r}") from exc
        elif key == "order":
            order = tuple(rest.split())
        elif key == "values":
            in_values = True
        else:
            raise ParseError(f"line {lineno}: unknown header key {key!r}")
    if random_scope is None or fixed_scope is None or not cards or order is None:
        raise ParseError("kernel file is missing header fields")
    if order != tuple(sorted(random_scope + fixed_scope)):
        raise ParseError("order line must list all variables sorted")
    kernel = DiscreteKernel(
        tuple(sorted(random_scope)),
        tuple(sorted(fixed_scope)),
        tuple(sorted(cards)),
        tuple(values),
        tangent,
    )
    try:
        kernel.validate()
    except (ShapeMismatchError, ZeroProbabilityError) as exc:
        raise ParseError(str(exc)) from exc
    return kernel


def kernel_from_text(text: str, *, tangent: bool = False) -> DiscreteKernel:
    return read_kernel(text.splitlines(), tangent=tangent)
