"""The free crossed module truncated at level N.

Degree -1 is modelled as T(R^n) (x) E with basis ``w (x) Z_jk`` (j < k) of level
``len(w) + 2``; its class in the semiabelian quotient is stored through the
non-pivot coordinates of an exact echelon form of the relation space.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import _linalg
from .free_lie import (
    BracketTree,
    first_kind_coordinates,
    generate_lyndon,
    i_tuples,
    is_lyndon,
    j_tuples,
    standard_bracketing,
    witt_number,
)
from .tensor_algebra import (
    ConstantTermError,
    DimensionMismatch,
    Scalar,
    TensorSeries,
    Word,
    as_scalar,
    bch_t,
    index_word,
    render_scalar,
    word_index,
    zeros,
)

Pair = tuple[int, int]
PreHBasisElement = tuple[Word, Pair]


def render_pre_h(element: PreHBasisElement) -> str:
    word, (j, k) = element
    text = f"({j},{k})"
    for letter in reversed(word):
        text = f"[{letter},{text}]"
    return text


_PRE_H = re.compile(r"^((?:\[\d+,)*)\((\d+),(\d+)\)(\]*)$")


def parse_pre_h(text: str) -> PreHBasisElement:
    m = _PRE_H.match(text.replace(" ", ""))
    if not m or len(m.group(4)) != m.group(1).count("["):
        raise ValueError(f"cannot parse {text!r} as w (x) Z_jk")
    word = tuple(int(x) for x in re.findall(r"\[(\d+),", m.group(1)))
    return word, (int(m.group(2)), int(m.group(3)))


@dataclass
class _Level:
    ell: int
    basis: list[PreHBasisElement]
    feedback: np.ndarray  # n**ell x full_dim, integer entries
    relations: np.ndarray  # echelon rows (r x full_dim)
    pivots: tuple[int, ...]
    nonpivots: np.ndarray
    reducer: np.ndarray  # relation rows restricted to non-pivot columns
    feedback_q: np.ndarray  # feedback restricted to non-pivot columns

    @property
    def full_dim(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return len(self.nonpivots)


class CrossedModuleContext:
    """Bases, relation echelon forms and feedback matrices for fixed (n, N)."""

    def __init__(self, n: int, N: int, exact: bool = True):
        if n < 1 or N < 2:
            raise ValueError("need n >= 1 and N >= 2")
        self.n = n
        self.N = N
        self.exact = exact
        self.pairs: list[Pair] = list(combinations(range(1, n + 1), 2))
        self._pair_index = {p: i for i, p in enumerate(self.pairs)}
        self._levels: dict[int, _Level] = {}
        for ell in range(2, N + 1):
            self._levels[ell] = self._build_level(ell)
        self._section: dict[int, tuple] = {}

    # -------------------------------------------------------------- building
    @property
    def npairs(self) -> int:
        return len(self.pairs)

    def full_index(self, element: PreHBasisElement) -> int:
        word, pair = element
        return word_index(word, self.n) * self.npairs + self._pair_index[tuple(pair)]

    def _tau_columns(self, ell: int) -> np.ndarray:
        n = self.n
        cols = []
        for widx in range(n ** (ell - 2)):
            word = index_word(widx, ell - 2, n)
            for (j, k) in self.pairs:
                v = zeros(n * n, True)
                v[(j - 1) * n + (k - 1)] += 1
                v[(k - 1) * n + (j - 1)] -= 1
                for letter in reversed(word):
                    e = zeros(n, True)
                    e[letter - 1] = Fraction(1)
                    v = np.multiply.outer(e, v).ravel() - np.multiply.outer(v, e).ravel()
                cols.append(v)
        if not cols:
            return np.empty((n**ell, 0), dtype=object)
        return np.stack(cols, axis=1)

    def _rho_basis(self, x: np.ndarray, p: int, element_index: int, ell_b: int) -> np.ndarray:
        """Full coordinates of rho_x(e_b) for x homogeneous of level p."""
        npairs = self.npairs
        widx, pidx = divmod(element_index, npairs)
        shift = self.n ** (ell_b - 2)
        out = zeros(self.n ** (p + ell_b - 2) * npairs, True)
        pos = (np.arange(self.n**p) * shift + widx) * npairs + pidx
        out[pos] = x
        return out

    def _build_level(self, ell: int) -> _Level:
        n = self.n
        basis = [(index_word(w, ell - 2, n), pair)
                 for w in range(n ** (ell - 2)) for pair in self.pairs]
        T = self._tau_columns(ell)
        full_dim = len(basis)
        gens = []
        for p in range(2, ell - 1):
            q = ell - p
            if q < p:
                break
            Tp, Tq = self._tau(p), self._tau(q)
            for a in range(Tp.shape[1]):
                for b in range(Tq.shape[1]):
                    if p == q and b < a:
                        continue
                    rel = self._rho_basis(Tp[:, a], p, b, q) + self._rho_basis(Tq[:, b], q, a, p)
                    if any(x != 0 for x in rel):
                        gens.append(rel)
        rows, pivots = _linalg.rref(gens, full_dim)
        if rows.shape[0] and any(x != 0 for x in T.dot(rows.T).ravel()):
            raise AssertionError(f"feedback does not vanish on relations at level {ell}")
        pivset = set(pivots)
        nonpivots = np.array([j for j in range(full_dim) if j not in pivset], dtype=int)
        reducer = rows[:, nonpivots] if rows.shape[0] else np.empty((0, len(nonpivots)), dtype=object)
        level = _Level(ell, basis, T, rows, pivots, nonpivots, reducer, T[:, nonpivots])
        if not self.exact:
            level.feedback = T.astype(float)
            level.reducer = reducer.astype(float)
            level.feedback_q = level.feedback_q.astype(float)
        return level

    def _tau(self, ell: int) -> np.ndarray:
        if ell in self._levels:
            T = self._levels[ell].feedback
            return T if self.exact else self._tau_columns(ell)
        return self._tau_columns(ell)

    # -------------------------------------------------------------- queries
    def level(self, ell: int) -> _Level:
        return self._levels[ell]

    def full_dim(self, ell: int) -> int:
        return self._levels[ell].full_dim

    def quotient_dim(self, ell: int) -> int:
        return self._levels[ell].dim

    def relation_dim(self, ell: int) -> int:
        return len(self._levels[ell].pivots)

    def quotient_basis(self, ell: int) -> list[PreHBasisElement]:
        lv = self._levels[ell]
        return [lv.basis[j] for j in lv.nonpivots]

    def quotient_labels(self, ell: int) -> list[str]:
        return [render_pre_h(e) for e in self.quotient_basis(ell)]

    def dims_table(self) -> list[dict]:
        from .free_lie import shape_counts

        rows = []
        for ell in range(2, self.N + 1):
            count_i, count_j = shape_counts(self.n, ell)
            rows.append({
                "level": ell,
                "dim_FL": witt_number(self.n, ell),
                "dim_f_minus_1": self.full_dim(ell),
                "dim_relations": self.relation_dim(ell),
                "dim_g_minus_1": self.quotient_dim(ell),
                "count_I": count_i,
                "count_J": count_j,
            })
        return rows

    # -------------------------------------------------------------- coordinates
    def _zero_vec(self, size: int) -> np.ndarray:
        return zeros(size, self.exact)

    def reduce(self, ell: int, full: np.ndarray) -> np.ndarray:
        lv = self._levels[ell]
        out = full[lv.nonpivots]
        if lv.pivots:
            piv_vals = full[list(lv.pivots)]
            if np.any(piv_vals != 0):
                out = out - piv_vals.dot(lv.reducer)
        return out

    def lift(self, ell: int, reduced: np.ndarray) -> np.ndarray:
        lv = self._levels[ell]
        out = self._zero_vec(lv.full_dim)
        out[lv.nonpivots] = reduced
        return out

    def zero(self) -> "HElement":
        return HElement(self, [self._zero_vec(self.quotient_dim(ell)) for ell in range(2, self.N + 1)])

    def from_full(self, full: dict[int, np.ndarray]) -> "HElement":
        levels = []
        for ell in range(2, self.N + 1):
            vec = full.get(ell)
            if vec is None:
                levels.append(self._zero_vec(self.quotient_dim(ell)))
            else:
                levels.append(self.reduce(ell, vec))
        return HElement(self, levels)

    def element(self, terms: dict[PreHBasisElement, Scalar] | Iterable[tuple[PreHBasisElement, Scalar]]) -> "HElement":
        """Class of a linear combination of basis elements w (x) Z_jk."""
        items = terms.items() if isinstance(terms, dict) else terms
        full: dict[int, np.ndarray] = {}
        for (word, pair), c in items:
            word = tuple(word)
            pair = tuple(pair)
            if pair[0] > pair[1]:
                pair, c = (pair[1], pair[0]), -c
            if pair[0] == pair[1]:
                continue
            ell = len(word) + 2
            if ell > self.N:
                continue
            vec = full.setdefault(ell, self._zero_vec(self.full_dim(ell)))
            j = self.full_index((word, pair))
            vec[j] = vec[j] + as_scalar(c, self.exact)
        return self.from_full(full)

    def basis_element(self, word: Sequence[int], pair: Pair) -> "HElement":
        return self.element({(tuple(word), tuple(pair)): 1})

    def from_labels(self, coeffs: dict[str, Scalar]) -> "HElement":
        return self.element({parse_pre_h(k): v for k, v in coeffs.items()})

    # -------------------------------------------------------------- structured basis
    def generators(self, ell: int) -> list[tuple[Word, "HElement"]]:
        """Right-combed elements indexed by i_1 >= ... >= i_{p-1} < i_p."""
        return [(t, self.basis_element(t[:-2], (t[-2], t[-1]))) for t in i_tuples(self.n, ell)]

    def kernel_elements(self, ell: int) -> list[tuple[Word, "HElement"]]:
        out = []
        for t in j_tuples(self.n, ell):
            head = t[:-3]
            a, b, c = t[-3:]
            terms = [((head + (a,), (b, c)), 1), ((head + (b,), (a, c)), -1), ((head + (c,), (a, b)), 1)]
            out.append((t, self.element(terms)))
        return out

    def structured_basis(self, ell: int) -> list[tuple[str, "HElement"]]:
        """Generators, Lyndon brackets of generators, then kernel elements."""
        if ell in self._section:
            return self._section[ell][0]
        gens: list[tuple[int, Word, HElement]] = []
        for p in range(2, ell + 1):
            for t, h in self.generators(p):
                gens.append((p, t, h))
        degs = [g[0] for g in gens]
        out: list[tuple[str, HElement]] = []
        for t, h in self.generators(ell):
            out.append((_render_generator(t), h))
        for word in _graded_lyndon(degs, ell):
            tree = standard_bracketing(word)
            value, label = self._eval_generator_tree(tree, gens)
            out.append((label, value))
        for t, h in self.kernel_elements(ell):
            out.append(("ker" + _render_tuple(t), h))
        mat = np.stack([h.level(ell) for _, h in out], axis=1) if out else np.empty((0, 0), dtype=object)
        if mat.shape[0] != mat.shape[1]:
            raise AssertionError(f"structured basis at level {ell} has {mat.shape[1]} elements, expected {mat.shape[0]}")
        exact_mat = mat if self.exact else None
        inv = _linalg.inverse(exact_mat) if exact_mat is not None else np.linalg.inv(mat.astype(float))
        self._section[ell] = (out, inv)
        return out

    def _eval_generator_tree(self, tree, gens) -> tuple["HElement", str]:
        if isinstance(tree, int):
            _, t, h = gens[tree - 1]
            return h, _render_generator(t)
        left, left_label = self._eval_generator_tree(tree[0], gens)
        right, right_label = self._eval_generator_tree(tree[1], gens)
        tau_label = _render_feedback_label(left_label)
        return derived_bracket(left, right), f"[{tau_label},{right_label}]"

    def structured_coordinates(self, h: "HElement", ell: int) -> dict[str, Scalar]:
        self.structured_basis(ell)
        basis, inv = self._section[ell]
        coeffs = inv.dot(h.level(ell))
        return {label: c for (label, _), c in zip(basis, coeffs)}


def _render_tuple(t: Word) -> str:
    return "(" + ",".join(str(x) for x in t) + ")"


def _render_generator(t: Word) -> str:
    return render_pre_h((t[:-2], (t[-2], t[-1])))


def _render_feedback_label(label: str) -> str:
    """Label of tau(x) for a generator or bracket label: (j,k) -> [j,k]."""
    return re.sub(r"\((\d+),(\d+)\)", r"[\1,\2]", label)


def _graded_lyndon(degs: list[int], total: int) -> list[tuple[int, ...]]:
    """Lyndon words (length >= 2) over generators 1..len(degs) of total degree `total`."""
    out = []

    def extend(prefix: tuple[int, ...], remaining: int) -> None:
        if remaining == 0:
            if len(prefix) >= 2 and is_lyndon(prefix):
                out.append(prefix)
            return
        for g, d in enumerate(degs, start=1):
            if d <= remaining:
                extend(prefix + (g,), remaining - d)

    extend((), total)
    return sorted(out)


@lru_cache(maxsize=None)
def build_context(n: int, N: int, exact: bool = True) -> CrossedModuleContext:
    if n < 2:
        raise ValueError("need n >= 2: no area generators Z_jk otherwise")
    return build_context_any(n, N, exact)


class HElement:
    """Element of the truncated quotient, stored as reduced coordinates per level."""

    __slots__ = ("ctx", "levels")

    def __init__(self, ctx: CrossedModuleContext, levels: Sequence[np.ndarray]):
        self.ctx = ctx
        self.levels = tuple(levels)

    def level(self, ell: int) -> np.ndarray:
        return self.levels[ell - 2]

    def full(self, ell: int) -> np.ndarray:
        return self.ctx.lift(ell, self.level(ell))

    def _check(self, other: "HElement") -> None:
        if other.ctx is not self.ctx:
            raise DimensionMismatch("elements belong to different contexts")

    def __add__(self, other: "HElement") -> "HElement":
        self._check(other)
        return HElement(self.ctx, [a + b for a, b in zip(self.levels, other.levels)])

    def __sub__(self, other: "HElement") -> "HElement":
        self._check(other)
        return HElement(self.ctx, [a - b for a, b in zip(self.levels, other.levels)])

    def __neg__(self) -> "HElement":
        return HElement(self.ctx, [-a for a in self.levels])

    def scale(self, c: Scalar) -> "HElement":
        c = as_scalar(c, self.ctx.exact)
        return HElement(self.ctx, [a * c for a in self.levels])

    def __mul__(self, c: Scalar) -> "HElement":
        return self.scale(c)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HElement):
            return NotImplemented
        return other.ctx is self.ctx and all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels))

    __hash__ = None  # type: ignore[assignment]

    def level_nonzero(self, ell: int) -> bool:
        return bool(np.any(self.level(ell) != 0))

    def is_zero(self) -> bool:
        return not any(np.any(a != 0) for a in self.levels)

    def max_abs(self, ell: int | None = None) -> Scalar:
        lvls = self.levels if ell is None else [self.level(ell)]
        best = as_scalar(0, self.ctx.exact)
        for a in lvls:
            if a.size:
                m = max(abs(x) for x in a) if self.ctx.exact else float(np.max(np.abs(a)))
                best = max(best, m)
        return best

    def truncate_levels(self, top: int) -> "HElement":
        """Zero every level above `top` (same context)."""
        return HElement(self.ctx, [a if ell <= top else a * 0 for ell, a in zip(range(2, self.ctx.N + 1), self.levels)])

    def to_context(self, ctx: CrossedModuleContext) -> "HElement":
        """Re-express in a context with the same n (truncating or zero-padding)."""
        if ctx.n != self.ctx.n:
            raise DimensionMismatch("different n")
        full = {ell: self.full(ell) for ell in range(2, min(self.ctx.N, ctx.N) + 1)}
        if ctx.exact != self.ctx.exact:
            conv = (lambda v: np.array([Fraction(x) for x in v], dtype=object)) if ctx.exact else (lambda v: v.astype(float))
            full = {k: conv(v) for k, v in full.items()}
        return ctx.from_full(full)

    def to_float(self) -> "HElement":
        return self.to_context(build_context_any(self.ctx.n, self.ctx.N, False))

    def to_dict(self) -> dict[str, Scalar]:
        out = {}
        for ell in range(2, self.ctx.N + 1):
            for label, c in zip(self.ctx.quotient_labels(ell), self.level(ell)):
                if c != 0:
                    out[label] = c
        return out

    def __repr__(self) -> str:
        items = self.to_dict()
        if not items:
            return "0"
        return " + ".join(f"{render_scalar(c)}*{k}" for k, c in items.items())


@lru_cache(maxsize=None)
def build_context_any(n: int, N: int, exact: bool = True) -> CrossedModuleContext:
    return CrossedModuleContext(n, N, exact)


# ------------------------------------------------------------------ operations
def feedback(h: HElement) -> TensorSeries:
    ctx = h.ctx
    levels = [zeros(ctx.n**k, ctx.exact) for k in range(ctx.N + 1)]
    for ell in range(2, ctx.N + 1):
        if h.level_nonzero(ell):
            levels[ell] = ctx.level(ell).feedback_q.dot(h.level(ell))
    return TensorSeries(ctx.n, ctx.N, levels, ctx.exact)


def _act_full(x: TensorSeries, h: HElement) -> dict[int, np.ndarray]:
    ctx = h.ctx
    out: dict[int, np.ndarray] = {}
    for ell in range(2, ctx.N + 1):
        if not h.level_nonzero(ell):
            continue
        hmat = h.full(ell).reshape(ctx.n ** (ell - 2), ctx.npairs)
        for p in range(1, min(x.N, ctx.N - ell) + 1):
            if not x.level_nonzero(p):
                continue
            contrib = np.multiply.outer(x.levels[p], hmat).reshape(-1)
            tgt = ell + p
            out[tgt] = out[tgt] + contrib if tgt in out else contrib
    return out


def act(x: TensorSeries, h: HElement) -> HElement:
    """rho_x(h): prepend the words of x to the word part of h."""
    ctx = h.ctx
    if x.n != ctx.n:
        raise DimensionMismatch("x and h live over different n")
    if x.exact != ctx.exact:
        raise DimensionMismatch("exact and float data cannot be combined")
    if x.constant() != 0:
        raise ConstantTermError("act needs x with zero constant term")
    return ctx.from_full(_act_full(x, h))


def derived_bracket(a: HElement, b: HElement) -> HElement:
    a._check(b)
    return act(feedback(a), b)


@lru_cache(maxsize=None)
def bch_terms(m: int) -> tuple[tuple[Fraction, BracketTree], ...]:
    """Lyndon expansion of log(exp X exp Y) with at most m letters (X = 1, Y = 2)."""
    basis = generate_lyndon(2, m)
    X = TensorSeries.letter(1, 2, m)
    Y = TensorSeries.letter(2, 2, m)
    coeffs = first_kind_coordinates(bch_t(X, Y), basis)
    return tuple((c, t) for t, c in coeffs.items())


def bch_h(a: HElement, b: HElement) -> HElement:
    """Group law of H: BCH series with the derived bracket (finite by grading)."""
    a._check(b)
    m = max(1, a.ctx.N // 2)
    memo: dict = {}

    def evaluate(t):
        if t in memo:
            return memo[t]
        if isinstance(t, int):
            val = a if t == 1 else b
        else:
            left = evaluate(t[0])
            val = left if left.is_zero() else derived_bracket(left, evaluate(t[1]))
        memo[t] = val
        return val

    out = a.ctx.zero()
    for c, t in bch_terms(m):
        out = out + evaluate(t).scale(c)
    return out


def exp_action(x: TensorSeries, h: HElement) -> HElement:
    """exp(rho_x) h as a finite sum."""
    acc = h
    term = h
    for k in range(1, h.ctx.N):
        term = act(x, term)
        if term.is_zero():
            break
        term = term.scale(Fraction(1, k) if h.ctx.exact else 1.0 / k)
        acc = acc + term
    return acc


def kernel_basis(ctx: CrossedModuleContext) -> dict[int, list[HElement]]:
    return {ell: [h for _, h in ctx.kernel_elements(ell)] for ell in range(2, ctx.N + 1)}


def group_distance(h1: HElement, h2: HElement) -> Scalar:
    """max |coefficient| of log(h1^{-1} h2)."""
    return bch_h(-h1, h2).max_abs()


__all__ = [
    "PreHBasisElement", "render_pre_h", "parse_pre_h", "CrossedModuleContext", "build_context",
    "build_context_any", "HElement", "feedback", "act", "derived_bracket", "bch_terms", "bch_h",
    "exp_action", "kernel_basis", "group_distance",
]
