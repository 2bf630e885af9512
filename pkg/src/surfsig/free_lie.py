"""Lyndon basis of the free Lie algebra, bracket trees, coordinates of the first kind."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence, Union

import numpy as np
from sympy.functions.combinatorial.numbers import mobius

from . import _linalg
from .tensor_algebra import Scalar, TensorSeries, Word, as_scalar, zeros

BracketTree = Union[int, tuple]


class NotLieElementError(ValueError):
    def __init__(self, level: int, residual: Scalar):
        super().__init__(f"not a Lie element: level {level} residual norm {residual}")
        self.level = level
        self.residual = residual


# ---------------------------------------------------------------- trees
def degree(t: BracketTree) -> int:
    if isinstance(t, int):
        return 1
    return degree(t[0]) + degree(t[1])


def foliage(t: BracketTree) -> Word:
    if isinstance(t, int):
        return (t,)
    return foliage(t[0]) + foliage(t[1])


def render_tree(t: BracketTree) -> str:
    if isinstance(t, int):
        return str(t)
    return f"[{render_tree(t[0])},{render_tree(t[1])}]"


_TOKEN = re.compile(r"\s*(\[|\]|,|\d+)")


def parse_tree(text: str) -> BracketTree:
    tokens = [m.group(1) for m in _TOKEN.finditer(text)]
    if "".join(tokens) != re.sub(r"\s+", "", text):
        raise ValueError(f"cannot parse bracket tree {text!r}")
    pos = 0

    def peek() -> str:
        if pos >= len(tokens):
            raise ValueError(f"unexpected end of {text!r}")
        return tokens[pos]

    def parse() -> BracketTree:
        nonlocal pos
        tok = peek()
        if tok == "[":
            pos += 1
            left = parse()
            if peek() != ",":
                raise ValueError(f"expected ',' in {text!r}")
            pos += 1
            right = parse()
            if peek() != "]":
                raise ValueError(f"expected ']' in {text!r}")
            pos += 1
            return (left, right)
        pos += 1
        return int(tok)

    tree = parse()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in {text!r}")
    return tree


def tree_array(t: BracketTree, n: int, exact: bool = True) -> np.ndarray:
    """Homogeneous tensor coordinates (length n**deg) of a bracket tree."""
    if isinstance(t, int):
        if not 1 <= t <= n:
            raise ValueError(f"leaf {t} outside 1..{n}")
        v = zeros(n, exact)
        v[t - 1] = as_scalar(1, exact)
        return v
    a = tree_array(t[0], n, exact)
    b = tree_array(t[1], n, exact)
    return np.multiply.outer(a, b).ravel() - np.multiply.outer(b, a).ravel()


def tree_to_tensor(t: BracketTree, n: int, N: int, exact: bool = True) -> TensorSeries:
    d = degree(t)
    if d > N:
        raise ValueError(f"tree degree {d} exceeds truncation {N}")
    return TensorSeries.homogeneous(tree_array(t, n, exact), d, n, N, exact)


# ---------------------------------------------------------------- Lyndon words
def lyndon_words(n: int, N: int) -> list[Word]:
    """All Lyndon words of length <= N over 1..n in lexicographic order (Duval)."""
    out: list[Word] = []
    w = [0]
    while w:
        w[-1] += 1
        out.append(tuple(w))
        m = len(w)
        while len(w) < N:
            w.append(w[len(w) - m])
        while w and w[-1] == n:
            w.pop()
    return out


def is_lyndon(word: Sequence) -> bool:
    word = tuple(word)
    return all(word < word[i:] + word[:i] for i in range(1, len(word))) and len(word) > 0


def standard_bracketing(word: Sequence[int]) -> BracketTree:
    word = tuple(word)
    if len(word) == 1:
        return word[0]
    for i in range(1, len(word)):
        if is_lyndon(word[i:]):
            return (standard_bracketing(word[:i]), standard_bracketing(word[i:]))
    raise ValueError(f"{word} is not a Lyndon word")


def witt_number(n: int, p: int) -> int:
    return sum(int(mobius(d)) * n ** (p // d) for d in range(1, p + 1) if p % d == 0) // p


@dataclass(frozen=True)
class LyndonEntry:
    word: Word
    tree: BracketTree
    tensor: np.ndarray  # exact homogeneous coordinates


@dataclass(frozen=True)
class LyndonBasis:
    n: int
    N: int
    levels: tuple  # levels[p] is a tuple of LyndonEntry for p = 0..N (level 0 empty)
    _dual: dict = field(default_factory=dict, repr=False, compare=False)

    def trees(self, p: int) -> list[BracketTree]:
        return [e.tree for e in self.levels[p]]

    def dims(self) -> list[int]:
        return [len(self.levels[p]) for p in range(1, self.N + 1)]

    def matrix(self, p: int) -> np.ndarray:
        """Columns are the tensor expansions of the level-p basis elements."""
        entries = self.levels[p]
        if not entries:
            return np.empty((self.n**p, 0), dtype=object)
        return np.stack([e.tensor for e in entries], axis=1)

    def dual(self, p: int) -> np.ndarray:
        if p not in self._dual:
            mat = self.matrix(p)
            self._dual[p] = _linalg.gram_dual(mat) if mat.shape[1] else np.empty((0, self.n**p), dtype=object)
        return self._dual[p]


@lru_cache(maxsize=None)
def generate_lyndon(n: int, N: int) -> LyndonBasis:
    if n < 1 or N < 1:
        raise ValueError("need n >= 1 and N >= 1")
    per_level: list[list[LyndonEntry]] = [[] for _ in range(N + 1)]
    for w in lyndon_words(n, N):
        t = standard_bracketing(w)
        per_level[len(w)].append(LyndonEntry(w, t, tree_array(t, n, True)))
    basis = LyndonBasis(n, N, tuple(tuple(lv) for lv in per_level))
    for p in range(1, N + 1):
        mat = basis.matrix(p)
        if mat.shape[1] and _linalg.rank(mat) != mat.shape[1]:
            raise AssertionError(f"Lyndon tensors dependent at level {p}")
        if mat.shape[1] != witt_number(n, p):
            raise AssertionError(f"level {p} count differs from Witt number")
    return basis


def dual_functionals(trees: Sequence[BracketTree], n: int) -> list[dict[Word, Fraction]]:
    """Dual functionals of a homogeneous family of trees, taken inside their span."""
    if not trees:
        return []
    p = degree(trees[0])
    mat = np.stack([tree_array(t, n, True) for t in trees], axis=1)
    D = _linalg.gram_dual(mat)
    from .tensor_algebra import index_word

    return [
        {index_word(j, p, n): D[r, j] for j in range(D.shape[1]) if D[r, j] != 0}
        for r in range(D.shape[0])
    ]


def first_kind_coordinates(L: TensorSeries, basis: LyndonBasis) -> dict[BracketTree, Scalar]:
    """Coefficients c_t with sum c_t * tree_to_tensor(t) = L."""
    if L.n != basis.n or L.N > basis.N:
        raise ValueError("basis does not cover the series")
    if L.constant() != 0:
        raise NotLieElementError(0, abs(L.constant()))
    out: dict[BracketTree, Scalar] = {}
    for p in range(1, L.N + 1):
        vec = L.levels[p]
        if not L.level_nonzero(p):
            continue
        D = basis.dual(p)
        B = basis.matrix(p)
        if L.exact:
            coeffs = D.dot(vec)
            residual = vec - B.dot(coeffs) if B.shape[1] else vec
            res_norm = max((abs(x) for x in residual), default=Fraction(0))
            bad = res_norm != 0
        else:
            coeffs = D.astype(float).dot(vec)
            residual = vec - B.astype(float).dot(coeffs) if B.shape[1] else vec
            res_norm = float(np.max(np.abs(residual)))
            bad = res_norm > 1e-9 * max(1.0, float(np.max(np.abs(vec))))
        if bad:
            raise NotLieElementError(p, res_norm)
        for entry, c in zip(basis.levels[p], coeffs):
            if c != 0:
                out[entry.tree] = c
    return out


def lie_from_coordinates(coeffs: Mapping[BracketTree, Scalar], n: int, N: int,
                         exact: bool = True) -> TensorSeries:
    out = TensorSeries.zero(n, N, exact)
    for t, c in coeffs.items():
        out = out + tree_to_tensor(t, n, N, exact).scale(c)
    return out


# ---------------------------------------------------------------- tableaux counts
def hook_content_count(shape: Sequence[int], n: int) -> int:
    """Number of semistandard tableaux of the given shape with entries <= n."""
    shape = [r for r in shape if r > 0]
    conj = [sum(1 for r in shape if r > j) for j in range(shape[0])] if shape else []
    num = Fraction(1)
    for i, row in enumerate(shape):
        for j in range(row):
            hook = (row - j - 1) + (conj[j] - i - 1) + 1
            num *= Fraction(n + j - i, hook)
    assert num.denominator == 1
    return int(num)


def shape_counts(n: int, p: int) -> tuple[int, int]:
    """(|I_{n,p}|, |J_{n,p}|): shapes (p-1,1) and (p-2,1,1)."""
    if n < 1 or p < 2:
        raise ValueError("need n >= 1 and p >= 2")
    count_i = hook_content_count([p - 1, 1], n)
    count_j = hook_content_count([p - 2, 1, 1], n) if p >= 3 else 0
    return count_i, count_j


def i_tuples(n: int, p: int) -> list[Word]:
    """Tuples i_1 >= ... >= i_{p-1} < i_p."""
    out = []
    for last in range(1, n + 1):
        for head in _nonincreasing(n, p - 1):
            if head[-1] < last:
                out.append(head + (last,))
    return sorted(out)


def j_tuples(n: int, p: int) -> list[Word]:
    """Tuples i_1 >= ... >= i_{p-2} < i_{p-1} < i_p."""
    if p < 3:
        return []
    out = []
    for head in _nonincreasing(n, p - 2):
        for a in range(head[-1] + 1, n + 1):
            for b in range(a + 1, n + 1):
                out.append(head + (a, b))
    return sorted(out)


def _nonincreasing(n: int, length: int) -> list[Word]:
    if length == 0:
        return [()]
    out = []
    for first in range(1, n + 1):
        for rest in _nonincreasing(first, length - 1):
            out.append((first,) + rest)
    return out


def fl_dimension(n: int, p: int) -> int:
    return witt_number(n, p)


__all__ = [
    "BracketTree", "NotLieElementError", "degree", "foliage", "render_tree", "parse_tree",
    "tree_array", "tree_to_tensor", "lyndon_words", "is_lyndon", "standard_bracketing",
    "witt_number", "LyndonEntry", "LyndonBasis", "generate_lyndon", "dual_functionals",
    "first_kind_coordinates", "lie_from_coordinates", "hook_content_count", "shape_counts",
    "i_tuples", "j_tuples", "fl_dimension",
]
