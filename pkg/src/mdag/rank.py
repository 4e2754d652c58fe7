"""Exact and floating-point rank computation for direction matrices."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Q = Fraction
SVD_CUTOFF = 1e-9


class ExactRowBasis:
    """Incremental row-echelon basis over the rationals."""

    def __init__(self, width: int):
        self.width = width
        self.rows: list[list[Q]] = []
        self.pivots: list[int] = []

    def reduce(self, row: Sequence[Q]) -> list[Q]:
        work = [Q(v) for v in row]
        if len(work) != self.width:
            raise ValueError(f"row of width {len(work)}, expected {self.width}")
        for pivot_row, col in zip(self.rows, self.pivots):
            if work[col] != 0:
                factor = work[col]
                for j in range(col, self.width):
                    work[j] -= factor * pivot_row[j]
        return work

    def add(self, row: Sequence[Q]) -> bool:
        """Insert a row; returns True when it enlarged the span."""
        work = self.reduce(row)
        col = next((j for j, v in enumerate(work) if v != 0), None)
        if col is None:
            return False
        lead = work[col]
        normalized = [v / lead for v in work]
        self.rows.append(normalized)
        self.pivots.append(col)
        return True

    def contains(self, row: Sequence[Q]) -> bool:
        return all(v == 0 for v in self.reduce(row))

    @property
    def rank(self) -> int:
        return len(self.rows)


def exact_rank(rows: Iterable[Sequence[Q]]) -> int:
    rows = list(rows)
    if not rows:
        return 0
    basis = ExactRowBasis(len(rows[0]))
    for r in rows:
        basis.add(r)
    return basis.rank


def float_rank(rows: Iterable[Sequence[Q]], cutoff: float = SVD_CUTOFF) -> int:
    mat = np.array([[float(v) for v in r] for r in rows], dtype=float)
    if mat.size == 0:
        return 0
    # scale rows to unit max to keep the cutoff meaningful for integer counts
    scale = np.abs(mat).max(axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    sv = np.linalg.svd(mat / scale, compute_uv=False)
    return int((sv > cutoff).sum())
