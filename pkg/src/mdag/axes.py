"""Finite named axes and mixed-radix indexing for the tables used everywhere.

An axis is either a variable axis (the states of one vertex) or a functional
axis (the index set of one vertex's function space).  Tables are stored flat
in row-major order over a canonically sorted axis tuple, last axis fastest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .errors import ShapeMismatchError

AxisKey = tuple[bool, str]


@dataclass(frozen=True, order=True)
class Axis:
    functional: bool
    name: str
    size: int

    @property
    def key(self) -> AxisKey:
        return (self.functional, self.name)

    def __str__(self) -> str:
        return f"F({self.name})" if self.functional else self.name


def vertex_axis(name: str, size: int) -> Axis:
    return Axis(False, name, size)


def function_axis(name: str, size: int) -> Axis:
    return Axis(True, name, size)


def canonical_axes(axes: Iterable[Axis]) -> tuple[Axis, ...]:
    """Sort axes canonically (variable axes first, each group by name)."""
    out = tuple(sorted(axes))
    keys = [a.key for a in out]
    if len(set(keys)) != len(keys):
        raise ShapeMismatchError(f"duplicate axes in {out}")
    return out


def product_size(axes: Iterable[Axis]) -> int:
    n = 1
    for a in axes:
        n *= a.size
    return n


@lru_cache(maxsize=4096)
def strides(axes: tuple[Axis, ...]) -> tuple[int, ...]:
    """Row-major strides, last axis fastest."""
    out = [1] * len(axes)
    for i in range(len(axes) - 2, -1, -1):
        out[i] = out[i + 1] * axes[i + 1].size
    return tuple(out)


def index_of(axes: tuple[Axis, ...], assignment: Mapping[AxisKey, int]) -> int:
    idx = 0
    for a, s in zip(axes, strides(axes)):
        v = assignment[a.key]
        if not 0 <= v < a.size:
            raise ShapeMismatchError(f"value {v} out of range for axis {a}")
        idx += s * v
    return idx


def assignment_of(axes: tuple[Axis, ...], idx: int) -> dict[AxisKey, int]:
    out: dict[AxisKey, int] = {}
    for a, s in zip(axes, strides(axes)):
        out[a.key] = (idx // s) % a.size
    return out


def iter_assignments(axes: tuple[Axis, ...]) -> Iterator[tuple[int, ...]]:
    """All value tuples in index order (last axis fastest)."""
    return itertools.product(*(range(a.size) for a in axes))
