"""Exact rational linear algebra shims over sympy's DomainMatrix."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _to_qq(x) -> object:
    f = Fraction(x)
    return QQ(f.numerator, f.denominator)


def _to_fraction(e) -> Fraction:
    return Fraction(int(e.numerator), int(e.denominator))


def to_domain(rows: Sequence[Sequence], ncols: int | None = None) -> DomainMatrix:
    rows = [list(r) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    data = [[_to_qq(x) for x in r] for r in rows]
    return DomainMatrix(data, (len(data), ncols), QQ)


def from_domain(dm: DomainMatrix) -> np.ndarray:
    rows, cols = dm.shape
    out = np.empty((rows, cols), dtype=object)
    for i, r in enumerate(dm.to_list()):
        for j, e in enumerate(r):
            out[i, j] = _to_fraction(e)
    return out


def rref(rows: Sequence[Sequence], ncols: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row echelon form; zero rows are dropped."""
    if len(rows) == 0:
        return np.empty((0, ncols), dtype=object), ()
    red, pivots = to_domain(rows, ncols).rref()
    mat = from_domain(red)[: len(pivots)]
    return mat, tuple(int(p) for p in pivots)


def inverse(mat: np.ndarray) -> np.ndarray:
    return from_domain(to_domain(mat.tolist()).inv())


def gram_dual(columns: np.ndarray) -> np.ndarray:
    """Rows D with D @ columns = I, lying in the column span."""
    B = to_domain(columns.tolist())
    BT = B.transpose()
    return from_domain((BT * B).inv() * BT)


def rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    return len(to_domain(mat.tolist()).rref()[1])
