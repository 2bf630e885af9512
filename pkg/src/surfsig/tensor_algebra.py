"""Truncated tensor algebra T^{<=N}(R^n).

Each level k is stored as a dense vector of length n**k indexed by words in
lexicographic order (letters are 1-based).  Exact series hold ``Fraction``
entries in object arrays; float series hold float64.  The two are never mixed.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

Scalar = Union[Fraction, float, int]
Word = tuple[int, ...]


class DimensionMismatch(ValueError):
    pass


class ConstantTermError(ValueError):
    pass


def zeros(size: int, exact: bool) -> np.ndarray:
    if exact:
        return np.full(size, Fraction(0), dtype=object)
    return np.zeros(size, dtype=float)


def as_scalar(c: Scalar, exact: bool) -> Scalar:
    if exact:
        return c if isinstance(c, Fraction) else Fraction(c)
    return float(c)


def to_exact_array(arr: Iterable) -> np.ndarray:
    return np.array([Fraction(x) for x in arr], dtype=object)


def word_index(word: Sequence[int], n: int) -> int:
    idx = 0
    for letter in word:
        if not 1 <= letter <= n:
            raise ValueError(f"letter {letter} outside 1..{n}")
        idx = idx * n + (letter - 1)
    return idx


def index_word(idx: int, k: int, n: int) -> Word:
    letters = []
    for _ in range(k):
        idx, r = divmod(idx, n)
        letters.append(r + 1)
    return tuple(reversed(letters))


def render_word(word: Word, n: int) -> str:
    if not word:
        return "e"
    if n <= 9:
        return "".join(str(a) for a in word)
    return ".".join(str(a) for a in word)


def render_scalar(c: Scalar) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return repr(float(c))


class TensorSeries:
    """Immutable truncated tensor series."""

    __slots__ = ("n", "N", "levels", "exact")

    def __init__(self, n: int, N: int, levels: Sequence[np.ndarray], exact: bool = True):
        if n < 1 or N < 0:
            raise ValueError("need n >= 1 and N >= 0")
        if len(levels) != N + 1:
            raise ValueError("levels must have N+1 entries")
        for k, lv in enumerate(levels):
            if lv.shape != (n**k,):
                raise ValueError(f"level {k} has shape {lv.shape}, expected {(n**k,)}")
        self.n = n
        self.N = N
        self.exact = exact
        self.levels = tuple(levels)

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int, N: int, exact: bool = True) -> "TensorSeries":
        return cls(n, N, [zeros(n**k, exact) for k in range(N + 1)], exact)

    @classmethod
    def unit(cls, n: int, N: int, exact: bool = True) -> "TensorSeries":
        out = cls.zero(n, N, exact)
        out.levels[0][0] = as_scalar(1, exact)
        return out

    @classmethod
    def letter(cls, i: int, n: int, N: int, exact: bool = True) -> "TensorSeries":
        return cls.from_words({(i,): 1}, n, N, exact)

    @classmethod
    def from_words(cls, coeffs: Mapping[Sequence[int], Scalar], n: int, N: int,
                   exact: bool = True) -> "TensorSeries":
        out = cls.zero(n, N, exact)
        for word, c in coeffs.items():
            word = tuple(word)
            if len(word) > N:
                continue
            lv = out.levels[len(word)]
            j = word_index(word, n)
            lv[j] = lv[j] + as_scalar(c, exact)
        return out

    @classmethod
    def homogeneous(cls, vec: np.ndarray, k: int, n: int, N: int, exact: bool = True) -> "TensorSeries":
        out = cls.zero(n, N, exact)
        if k <= N:
            out.levels[k][:] = vec
        return out

    @classmethod
    def from_vector(cls, delta: Sequence[Scalar], N: int, exact: bool = True) -> "TensorSeries":
        n = len(delta)
        out = cls.zero(n, N, exact)
        if N >= 1:
            out.levels[1][:] = [as_scalar(c, exact) for c in delta]
        return out

    # basic protocol -----------------------------------------------------
    def _check(self, other: "TensorSeries") -> None:
        if not isinstance(other, TensorSeries):
            raise TypeError("expected TensorSeries")
        if (self.n, self.N) != (other.n, other.N):
            raise DimensionMismatch(f"(n, N) = {(self.n, self.N)} vs {(other.n, other.N)}")
        if self.exact != other.exact:
            raise DimensionMismatch("exact and float series cannot be combined")

    def __add__(self, other: "TensorSeries") -> "TensorSeries":
        self._check(other)
        return TensorSeries(self.n, self.N, [a + b for a, b in zip(self.levels, other.levels)], self.exact)

    def __sub__(self, other: "TensorSeries") -> "TensorSeries":
        self._check(other)
        return TensorSeries(self.n, self.N, [a - b for a, b in zip(self.levels, other.levels)], self.exact)

    def __neg__(self) -> "TensorSeries":
        return TensorSeries(self.n, self.N, [-a for a in self.levels], self.exact)

    def scale(self, c: Scalar) -> "TensorSeries":
        c = as_scalar(c, self.exact)
        return TensorSeries(self.n, self.N, [a * c for a in self.levels], self.exact)

    def __mul__(self, other):
        if isinstance(other, TensorSeries):
            return concat_product(self, other)
        return self.scale(other)

    def __rmul__(self, c: Scalar) -> "TensorSeries":
        return self.scale(c)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorSeries):
            return NotImplemented
        if (self.n, self.N, self.exact) != (other.n, other.N, other.exact):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels))

    __hash__ = None  # type: ignore[assignment]

    def level(self, k: int) -> np.ndarray:
        return self.levels[k]

    def level_nonzero(self, k: int) -> bool:
        return bool(np.any(self.levels[k] != 0))

    def is_zero(self) -> bool:
        return not any(self.level_nonzero(k) for k in range(self.N + 1))

    def constant(self) -> Scalar:
        return self.levels[0][0]

    def max_abs(self, k: int | None = None) -> Scalar:
        lvls = self.levels if k is None else [self.levels[k]]
        best = as_scalar(0, self.exact)
        for lv in lvls:
            if lv.size:
                m = max(abs(x) for x in lv) if self.exact else float(np.max(np.abs(lv)))
                best = max(best, m)
        return best

    def homogeneous_part(self, k: int) -> "TensorSeries":
        return TensorSeries.homogeneous(self.levels[k].copy(), k, self.n, self.N, self.exact)

    def truncate(self, N: int) -> "TensorSeries":
        """Change the truncation level, dropping or zero-padding levels."""
        lv = list(self.levels[: N + 1])
        for k in range(len(lv), N + 1):
            lv.append(zeros(self.n**k, self.exact))
        return TensorSeries(self.n, N, lv, self.exact)

    def to_float(self) -> "TensorSeries":
        return TensorSeries(self.n, self.N, [np.asarray(a, dtype=float) for a in self.levels], False)

    def to_dict(self) -> dict[Word, Scalar]:
        out: dict[Word, Scalar] = {}
        for k, lv in enumerate(self.levels):
            for j in np.flatnonzero(lv != 0):
                out[index_word(int(j), k, self.n)] = lv[j]
        return out

    def __repr__(self) -> str:
        items = self.to_dict()
        if not items:
            return "0"
        return " + ".join(f"{render_scalar(c)}*{render_word(w, self.n)}" for w, c in items.items())


GroupLike = TensorSeries


def concat_product(A: TensorSeries, B: TensorSeries) -> TensorSeries:
    A._check(B)
    N, n = A.N, A.n
    nzA = [A.level_nonzero(k) for k in range(N + 1)]
    nzB = [B.level_nonzero(k) for k in range(N + 1)]
    out = []
    for k in range(N + 1):
        acc = zeros(n**k, A.exact)
        for p in range(k + 1):
            if nzA[p] and nzB[k - p]:
                acc = acc + np.multiply.outer(A.levels[p], B.levels[k - p]).ravel()
        out.append(acc)
    return TensorSeries(n, N, out, A.exact)


def commutator(A: TensorSeries, B: TensorSeries) -> TensorSeries:
    return concat_product(A, B) - concat_product(B, A)


def pairing(A: TensorSeries, word: Sequence[int]) -> Scalar:
    word = tuple(word)
    if len(word) > A.N:
        raise ValueError("word longer than truncation level")
    return A.levels[len(word)][word_index(word, A.n)]


def _reciprocal(k: int, exact: bool) -> Scalar:
    return Fraction(1, k) if exact else 1.0 / k


def exp_t(A: TensorSeries) -> TensorSeries:
    if A.constant() != 0:
        raise ConstantTermError("exp_t needs a zero constant term")
    one = TensorSeries.unit(A.n, A.N, A.exact)
    acc = one
    for k in range(A.N, 0, -1):
        acc = one + concat_product(A, acc).scale(_reciprocal(k, A.exact))
    return acc


def log_t(G: TensorSeries) -> TensorSeries:
    if G.constant() != 1:
        raise ConstantTermError("log_t needs constant term 1")
    X = G - TensorSeries.unit(G.n, G.N, G.exact)
    if G.N == 0:
        return X
    one = TensorSeries.unit(G.n, G.N, G.exact)

    def c(k: int) -> Scalar:
        r = _reciprocal(k, G.exact)
        return r if k % 2 else -r

    acc = one.scale(c(G.N))
    for k in range(G.N - 1, 0, -1):
        acc = one.scale(c(k)) + concat_product(X, acc)
    return concat_product(X, acc)


def bch_t(a: TensorSeries, b: TensorSeries) -> TensorSeries:
    if a.constant() != 0 or b.constant() != 0:
        raise ConstantTermError("bch_t needs Lie (zero constant term) inputs")
    return log_t(concat_product(exp_t(a), exp_t(b)))


def inverse_t(G: TensorSeries) -> TensorSeries:
    """Inverse of an element with constant term 1 (Neumann series)."""
    one = TensorSeries.unit(G.n, G.N, G.exact)
    X = one - G
    acc = one
    for _ in range(G.N):
        acc = one + concat_product(X, acc)
    return acc
