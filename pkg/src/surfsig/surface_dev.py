"""Surface log-signature Omega of X: [0,1]^2 -> R^n in the free crossed module.

Omega is computed as the two-step Magnus expansion of the 1-form
K(q) = int exp(rho_{omega(hook to (r,q))}) beta(r,q) dr, where the hook runs up the
left edge from the lower-left corner and then right to (r, q).  Every term beyond
the first commutator has degree >= 6, so this is exact through level 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _linalg
from .crossed_module import (
    CrossedModuleContext,
    HElement,
    bch_h,
    derived_bracket,
    exp_action,
    feedback,
)
from .path_dev import PathContext, path_logsig, path_signature
from .tensor_algebra import (
    Scalar,
    TensorSeries,
    as_scalar,
    concat_product,
    exp_t,
    log_t,
)

MAX_QUADRATURE_LEVEL = 5


class GridAlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class Rect:
    s1: Scalar
    s2: Scalar
    t1: Scalar
    t2: Scalar

    def __post_init__(self):
        if self.s1 > self.t1 or self.s2 > self.t2:
            raise ValueError(f"degenerate corners in {self}")

    @classmethod
    def unit(cls) -> "Rect":
        return cls(Fraction(0), Fraction(0), Fraction(1), Fraction(1))

    @property
    def width(self) -> Scalar:
        return self.t1 - self.s1

    @property
    def height(self) -> Scalar:
        return self.t2 - self.s2

    @property
    def area(self) -> Scalar:
        return self.width * self.height

    def boundary(self) -> list[tuple[Scalar, Scalar]]:
        """Counter-clockwise loop from the lower-left corner."""
        return [(self.s1, self.s2), (self.t1, self.s2), (self.t1, self.t2), (self.s1, self.t2), (self.s1, self.s2)]

    def split_horizontal(self, at: Scalar) -> tuple["Rect", "Rect"]:
        return Rect(self.s1, self.s2, at, self.t2), Rect(at, self.s2, self.t1, self.t2)

    def split_vertical(self, at: Scalar) -> tuple["Rect", "Rect"]:
        return Rect(self.s1, self.s2, self.t1, at), Rect(self.s1, at, self.t1, self.t2)


class LinearSurface:
    """X(r, q) = M (r, q)^T with an exact n x 2 matrix M."""

    def __init__(self, M: Sequence[Sequence[Scalar]], exact: bool = True):
        rows = [list(r) for r in M]
        if not rows or any(len(r) != 2 for r in rows):
            raise ValueError("M must have shape n x 2")
        self.exact = exact
        self.M = np.array([[as_scalar(x, exact) for x in r] for r in rows], dtype=object if exact else float)
        self.n = len(rows)

    def value(self, r: Scalar, q: Scalar) -> np.ndarray:
        return self.M[:, 0] * r + self.M[:, 1] * q

    def det(self, i: int, j: int) -> Scalar:
        M = self.M
        return M[i - 1, 0] * M[j - 1, 1] - M[j - 1, 0] * M[i - 1, 1]

    def area_integral(self, rect: Rect, i: int, j: int) -> Scalar:
        return rect.area * self.det(i, j)

    def translated(self, c: Sequence[Scalar]) -> "AffineSurface":
        return AffineSurface(self, c)


class AffineSurface(LinearSurface):
    """A linear surface shifted by a constant vector."""

    def __init__(self, base: LinearSurface, offset: Sequence[Scalar]):
        super().__init__(base.M.tolist(), base.exact)
        self.offset = np.array([as_scalar(x, base.exact) for x in offset], dtype=base.M.dtype)

    def value(self, r, q):
        return super().value(r, q) + self.offset


class SurfaceGrid:
    """Samples X[a, b] at the nodes (a / M1, b / M2)."""

    def __init__(self, values, exact: bool | None = None):
        arr = np.asarray(values, dtype=object)
        if arr.ndim != 3 or arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError("grid values must have shape (M1+1, M2+1, n) with M1, M2 >= 1")
        if exact is None:
            exact = all(isinstance(x, (int, Fraction)) for x in arr.ravel())
        self.exact = exact
        if exact:
            self.X = np.vectorize(Fraction, otypes=[object])(arr)
        else:
            self.X = arr.astype(float)
            if not np.all(np.isfinite(self.X)):
                raise ValueError("grid contains non-finite values")
        self.M1 = arr.shape[0] - 1
        self.M2 = arr.shape[1] - 1
        self.n = arr.shape[2]

    @classmethod
    def from_function(cls, f: Callable, M1: int, M2: int, exact: bool = False) -> "SurfaceGrid":
        vals = []
        for a in range(M1 + 1):
            row = []
            for b in range(M2 + 1):
                r, q = (Fraction(a, M1), Fraction(b, M2)) if exact else (a / M1, b / M2)
                row.append(list(f(r, q)))
            vals.append(row)
        return cls(vals, exact)

    @property
    def h1(self) -> Scalar:
        return Fraction(1, self.M1) if self.exact else 1.0 / self.M1

    @property
    def h2(self) -> Scalar:
        return Fraction(1, self.M2) if self.exact else 1.0 / self.M2

    def node(self, a: int, b: int) -> np.ndarray:
        return self.X[a, b]

    def cell_derivatives(self, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
        """Averaged forward differences: the derivatives of the bilinear patch at its centre."""
        X = self.X
        half = Fraction(1, 2) if self.exact else 0.5
        d1 = ((X[a + 1, b] - X[a, b]) + (X[a + 1, b + 1] - X[a, b + 1])) * half / self.h1
        d2 = ((X[a, b + 1] - X[a, b]) + (X[a + 1, b + 1] - X[a + 1, b])) * half / self.h2
        return d1, d2

    def cell_jacobian(self, a: int, b: int, i: int, j: int) -> Scalar:
        d1, d2 = self.cell_derivatives(a, b)
        return d1[i - 1] * d2[j - 1] - d1[j - 1] * d2[i - 1]

    def cell_center(self, a: int, b: int) -> np.ndarray:
        X = self.X
        quarter = Fraction(1, 4) if self.exact else 0.25
        return (X[a, b] + X[a + 1, b] + X[a, b + 1] + X[a + 1, b + 1]) * quarter

    def span(self, rect: Rect) -> tuple[int, int, int, int]:
        """Node index range (a0, a1, b0, b1) covered by an aligned rectangle."""
        def idx(x, m, label):
            v = x * m
            k = round(v)
            if abs(v - k) > 1e-9:
                raise GridAlignmentError(f"{label} = {x} is not on the grid")
            return int(k)

        a0, a1 = idx(rect.s1, self.M1, "s1"), idx(rect.t1, self.M1, "t1")
        b0, b1 = idx(rect.s2, self.M2, "s2"), idx(rect.t2, self.M2, "t2")
        if not (0 <= a0 <= a1 <= self.M1 and 0 <= b0 <= b1 <= self.M2):
            raise GridAlignmentError(f"{rect} leaves the grid")
        return a0, a1, b0, b1

    def full_rect(self) -> Rect:
        return Rect.unit() if self.exact else Rect(0.0, 0.0, 1.0, 1.0)

    def area_integral(self, rect: Rect, i: int, j: int) -> Scalar:
        a0, a1, b0, b1 = self.span(rect)
        total = as_scalar(0, self.exact)
        for a in range(a0, a1):
            for b in range(b0, b1):
                total = total + self.cell_jacobian(a, b, i, j)
        return total * self.h1 * self.h2

    def boundary_images(self, rect: Rect) -> list[np.ndarray]:
        a0, a1, b0, b1 = self.span(rect)
        pts = [self.X[a, b0] for a in range(a0, a1 + 1)]
        pts += [self.X[a1, b] for b in range(b0 + 1, b1 + 1)]
        pts += [self.X[a, b1] for a in range(a1 - 1, a0 - 1, -1)]
        pts += [self.X[a0, b] for b in range(b1 - 1, b0 - 1, -1)]
        return pts


@dataclass
class OmegaValue:
    value: HElement
    rect: Rect
    provenance: str  # quadrature | assembled | lifted | sewn
    diagnostics: dict = field(default_factory=dict)

    def level(self, ell: int) -> np.ndarray:
        return self.value.level(ell)


# ------------------------------------------------------------------ helpers
def _check_ctx(surface, ctx: CrossedModuleContext) -> None:
    if surface.n != ctx.n:
        raise ValueError(f"surface has n = {surface.n}, context n = {ctx.n}")
    if surface.exact != ctx.exact:
        raise ValueError("exact and float data cannot be combined")


def _path_ctx(ctx: CrossedModuleContext, top: int | None = None) -> PathContext:
    return PathContext(ctx.n, ctx.N - 2 if top is None else top, ctx.exact)


def _beta(ctx: CrossedModuleContext, J: dict, scale: Scalar = 1) -> HElement:
    """Level-2 element sum_{j<k} scale * J[(j,k)] Z_jk."""
    vec = np.array([as_scalar(J[p] * scale, ctx.exact) for p in ctx.pairs], dtype=object if ctx.exact else float)
    levels = [ctx.reduce(2, vec)] + [ctx._zero_vec(ctx.quotient_dim(ell)) for ell in range(3, ctx.N + 1)]
    return HElement(ctx, levels)


def jacobian_minor(surface, where, i: int, j: int) -> Scalar:
    """J^(ij) for a linear surface, or on a grid cell (index pair) or at a parameter point."""
    if not i < j:
        raise ValueError("need i < j")
    if isinstance(surface, LinearSurface):
        return surface.det(i, j)
    a, b = where
    if not (isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer))):
        a = min(int(math.floor(a * surface.M1)), surface.M1 - 1)
        b = min(int(math.floor(b * surface.M2)), surface.M2 - 1)
    return surface.cell_jacobian(int(a), int(b), i, j)


@lru_cache(maxsize=None)
def newton_cotes(m: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Closed Newton-Cotes nodes and weights on [0, 1] with m + 1 points."""
    if m == 0:
        return (Fraction(1, 2),), (Fraction(1),)
    nodes = [Fraction(k, m) for k in range(m + 1)]
    V = np.array([[x**p for x in nodes] for p in range(m + 1)], dtype=object)
    rhs = np.array([Fraction(1, p + 1) for p in range(m + 1)], dtype=object)
    w = _linalg.inverse(V).dot(rhs)
    return tuple(nodes), tuple(w)


# ------------------------------------------------------------------ quadrature
def _omega_linear(surface: LinearSurface, rect: Rect, ctx: CrossedModuleContext, m: int) -> HElement:
    N = ctx.N
    pctx = _path_ctx(ctx)
    exact = ctx.exact
    nodes, weights = newton_cotes(m)
    if not exact:
        nodes = tuple(float(x) for x in nodes)
        weights = tuple(float(x) for x in weights)
    beta = _beta(ctx, {p: surface.det(*p) for p in ctx.pairs})
    base = surface.value(rect.s1, rect.s2)
    cache: dict = {}

    def K(q):
        if q in cache:
            return cache[q]
        left = surface.value(rect.s1, q)
        acc = ctx.zero()
        for x, w in zip(nodes, weights):
            r = rect.s1 + x * rect.width
            if N > 2:
                omega = path_logsig([base, left, surface.value(r, q)], pctx).series
                term = exp_action(omega, beta)
            else:
                term = beta
            acc = acc + term.scale(w)
        cache[q] = acc.scale(rect.width)
        return cache[q]

    first = ctx.zero()
    for x, w in zip(nodes, weights):
        first = first + K(rect.s2 + x * rect.height).scale(w)
    first = first.scale(rect.height)
    if N < 4:
        return first
    half = Fraction(1, 2) if exact else 0.5
    tri = ctx.zero()
    for x, w in zip(nodes, weights):
        q = rect.s2 + x * rect.height
        inner = ctx.zero()
        for y, v in zip(nodes, weights):
            inner = inner + K(rect.s2 + y * (q - rect.s2)).scale(v)
        inner = inner.scale(q - rect.s2)
        tri = tri + derived_bracket(inner, K(q)).scale(w)
    return first + tri.scale(rect.height * half)


def _row_hook_logsigs(grid: SurfaceGrid, a0: int, a1: int, b0: int, b: int, pctx: PathContext):
    """omega of the polygonal hook image from (a0, b0) to each cell centre of row b."""
    X = grid.X
    half = Fraction(1, 2) if grid.exact else 0.5
    left = [X[a0, k] for k in range(b0, b + 1)]
    left_mid = (X[a0, b] + X[a0, b + 1]) * half
    S = path_signature(left + [left_mid], pctx)
    mid_prev = left_mid
    out = []
    for a in range(a0, a1):
        centre = grid.cell_center(a, b)
        out.append(log_t(concat_product(S, exp_t(TensorSeries.from_vector(centre - mid_prev, pctx.N, pctx.exact)))))
        mid_next = (X[a + 1, b] + X[a + 1, b + 1]) * half
        S = concat_product(S, exp_t(TensorSeries.from_vector(mid_next - mid_prev, pctx.N, pctx.exact)))
        mid_prev = mid_next
    return out


def _omega_grid(grid: SurfaceGrid, rect: Rect, ctx: CrossedModuleContext) -> HElement:
    a0, a1, b0, b1 = grid.span(rect)
    N = ctx.N
    pctx = _path_ctx(ctx)
    h1, h2 = grid.h1, grid.h2
    rows = []
    for b in range(b0, b1):
        hooks = _row_hook_logsigs(grid, a0, a1, b0, b, pctx) if N > 2 else None
        acc = ctx.zero()
        for k, a in enumerate(range(a0, a1)):
            beta = _beta(ctx, {p: grid.cell_jacobian(a, b, *p) for p in ctx.pairs})
            acc = acc + (exp_action(hooks[k], beta) if hooks is not None else beta)
        rows.append(acc.scale(h1))
    total = ctx.zero()
    for K in rows:
        total = total + K
    total = total.scale(h2)
    if N >= 4 and len(rows) > 1:
        half = Fraction(1, 2) if ctx.exact else 0.5
        prefix = ctx.zero()
        tri = ctx.zero()
        for K in rows:
            if not prefix.is_zero():
                tri = tri + derived_bracket(prefix, K)
            prefix = prefix + K
        total = total + tri.scale(h2 * h2 * half)
    return total


def omega_quadrature(surface, rect: Rect | None, ctx: CrossedModuleContext,
                     nodes: int | None = None, rule: str = "midpoint") -> OmegaValue:
    """Omega over ``rect`` (levels <= 5).

    Linear surfaces use closed Newton-Cotes rules that integrate the polynomial
    integrands exactly; grids use the composite midpoint rule over cells.
    """
    _check_ctx(surface, ctx)
    if ctx.N > MAX_QUADRATURE_LEVEL:
        raise ValueError(f"quadrature is available up to level {MAX_QUADRATURE_LEVEL}; use chen_assemble or sewing")
    if isinstance(surface, LinearSurface):
        rect = rect or Rect.unit()
        value = _omega_linear(surface, rect, ctx, nodes if nodes is not None else ctx.N)
    elif isinstance(surface, SurfaceGrid):
        if rule != "midpoint":
            raise ValueError(f"unknown grid rule {rule!r}")
        rect = rect or surface.full_rect()
        value = _omega_grid(surface, rect, ctx)
    else:
        raise TypeError(f"unsupported surface {type(surface).__name__}")
    return OmegaValue(value, rect, "quadrature")


def cell_germ(surface, cell: Rect, ctx: CrossedModuleContext) -> HElement:
    """Level-2 element: the integral of beta over the cell."""
    _check_ctx(surface, ctx)
    return _beta(ctx, {p: surface.area_integral(cell, *p) for p in ctx.pairs})


# ------------------------------------------------------------------ assembly
def _cell_data(surface, rect: Rect, ctx: CrossedModuleContext, cells, cell_rule: str):
    """Node images (m1+1) x (m2+1) and per-cell group elements."""
    if isinstance(surface, SurfaceGrid):
        a0, a1, b0, b1 = surface.span(rect)
        m1, m2 = a1 - a0, b1 - b0
        P = [[surface.X[a0 + i, b0 + k] for k in range(m2 + 1)] for i in range(m1 + 1)]
        h1, h2 = surface.h1, surface.h2
        rects = [[Rect(rect.s1 + i * h1, rect.s2 + k * h2, rect.s1 + (i + 1) * h1, rect.s2 + (k + 1) * h2)
                  for k in range(m2)] for i in range(m1)]
    else:
        if cells is None:
            raise ValueError("linear surfaces need an explicit cell count (m1, m2)")
        m1, m2 = cells
        xs = [rect.s1 + rect.width * Fraction(i, m1) for i in range(m1 + 1)]
        ys = [rect.s2 + rect.height * Fraction(k, m2) for k in range(m2 + 1)]
        if not ctx.exact:
            xs = [float(x) for x in xs]
            ys = [float(y) for y in ys]
        P = [[surface.value(x, y) for y in ys] for x in xs]
        rects = [[Rect(xs[i], ys[k], xs[i + 1], ys[k + 1]) for k in range(m2)] for i in range(m1)]
    if m1 < 1 or m2 < 1:
        raise GridAlignmentError("rectangle contains no cells")
    if cell_rule == "germ":
        E = [[cell_germ(surface, rects[i][k], ctx) for k in range(m2)] for i in range(m1)]
    elif cell_rule == "quadrature":
        E = [[omega_quadrature(surface, rects[i][k], ctx).value for k in range(m2)] for i in range(m1)]
    else:
        raise ValueError(f"unknown cell rule {cell_rule!r}")
    return P, E


class _EdgeWalker:
    """Running log-signature along a polygonal edge."""

    def __init__(self, start, pctx: PathContext):
        self.pctx = pctx
        self.S = TensorSeries.unit(pctx.n, pctx.N, pctx.exact)
        self.last = start

    def step(self, point) -> TensorSeries:
        inc = point - self.last
        self.last = point
        self.S = concat_product(self.S, exp_t(TensorSeries.from_vector(inc, self.pctx.N, self.pctx.exact)))
        return log_t(self.S)


def combine_horizontal(left: HElement, right: HElement, bottom_left: TensorSeries) -> HElement:
    """Omega(A B) for B to the right of A; ``bottom_left`` is omega of A's bottom edge."""
    return bch_h(exp_action(bottom_left, right), left)


def combine_vertical(lower: HElement, upper: HElement, left_lower: TensorSeries) -> HElement:
    """Omega for ``upper`` stacked on ``lower``; ``left_lower`` is omega of the lower piece's left edge."""
    return bch_h(lower, exp_action(left_lower, upper))


def fold_cells(P, E, ctx: CrossedModuleContext, order: str = "row") -> HElement:
    m1, m2 = len(E), len(E[0])
    pctx = _path_ctx(ctx)
    if order == "row":
        rows = []
        for k in range(m2):
            acc = E[0][k]
            walk = _EdgeWalker(P[0][k], pctx)
            for i in range(1, m1):
                acc = combine_horizontal(acc, E[i][k], walk.step(P[i][k]))
            rows.append(acc)
        total = rows[0]
        walk = _EdgeWalker(P[0][0], pctx)
        for k in range(1, m2):
            total = combine_vertical(total, rows[k], walk.step(P[0][k]))
        return total
    if order == "column":
        cols = []
        for i in range(m1):
            acc = E[i][0]
            walk = _EdgeWalker(P[i][0], pctx)
            for k in range(1, m2):
                acc = combine_vertical(acc, E[i][k], walk.step(P[i][k]))
            cols.append(acc)
        total = cols[0]
        walk = _EdgeWalker(P[0][0], pctx)
        for i in range(1, m1):
            total = combine_horizontal(total, cols[i], walk.step(P[i][0]))
        return total
    raise ValueError(f"unknown assembly order {order!r}")


def chen_assemble(surface, rect: Rect | None, ctx: CrossedModuleContext, cells: tuple[int, int] | None = None,
                  order: str = "row", cell_rule: str = "germ") -> OmegaValue:
    """Fold per-cell elements with the horizontal and vertical Chen rules.

    ``order`` is "row", "column" or "both"; with "both" the row-major value is
    returned and the coefficient gap to column-major is stored in diagnostics.
    """
    _check_ctx(surface, ctx)
    if rect is None:
        rect = surface.full_rect() if isinstance(surface, SurfaceGrid) else Rect.unit()
    P, E = _cell_data(surface, rect, ctx, cells, cell_rule)
    if order == "both":
        row = fold_cells(P, E, ctx, "row")
        col = fold_cells(P, E, ctx, "column")
        gap = (row - col).max_abs()
        return OmegaValue(row, rect, "assembled", {"order_gap": gap, "column": col})
    return OmegaValue(fold_cells(P, E, ctx, order), rect, "assembled")


def chen_residual(surface, rect: Rect, ctx: CrossedModuleContext, cells: tuple[int, int] | None = None,
                  split: str = "horizontal", order: str = "row", cell_rule: str = "germ") -> Scalar:
    """Gap between the assembled whole and the Chen combination of two assembled halves."""
    P, E = _cell_data(surface, rect, ctx, cells, cell_rule)
    whole = fold_cells(P, E, ctx, order)
    m1, m2 = len(E), len(E[0])
    pctx = _path_ctx(ctx)
    if split == "horizontal":
        cut = m1 // 2
        if cut == 0:
            raise ValueError("need at least two cell columns")
        left = fold_cells(P[: cut + 1], E[:cut], ctx, order)
        right = fold_cells(P[cut:], E[cut:], ctx, order)
        bottom = path_logsig([P[i][0] for i in range(cut + 1)], pctx).series
        glued = combine_horizontal(left, right, bottom)
    elif split == "vertical":
        cut = m2 // 2
        if cut == 0:
            raise ValueError("need at least two cell rows")
        lower = fold_cells([col[: cut + 1] for col in P], [col[:cut] for col in E], ctx, order)
        upper = fold_cells([col[cut:] for col in P], [col[cut:] for col in E], ctx, order)
        left_edge = path_logsig([P[0][k] for k in range(cut + 1)], pctx).series
        glued = combine_vertical(lower, upper, left_edge)
    else:
        raise ValueError(f"unknown split {split!r}")
    return (whole - glued).max_abs()


# ------------------------------------------------------------------ Stokes and lifts
def boundary_images(surface, rect: Rect) -> list:
    if isinstance(surface, SurfaceGrid):
        return surface.boundary_images(rect)
    return [surface.value(r, q) for r, q in rect.boundary()]


def boundary_logsig(surface, rect: Rect, N: int, exact: bool) -> TensorSeries:
    return path_logsig(boundary_images(surface, rect), PathContext(surface.n, N, exact)).series


def stokes_check(omega: OmegaValue, surface) -> dict[int, Scalar]:
    """Per-level max |feedback(Omega) - log-signature of the boundary image|."""
    ctx = omega.value.ctx
    diff = feedback(omega.value) - boundary_logsig(surface, omega.rect, ctx.N, ctx.exact)
    return {k: diff.max_abs(k) for k in range(1, ctx.N + 1)}


def _feedback_section(ctx: CrossedModuleContext, ell: int, target: np.ndarray) -> HElement:
    """Element in the span of the non-kernel structured basis whose feedback is ``target``."""
    basis = [h for label, h in ctx.structured_basis(ell) if not label.startswith("ker")]
    if not basis:
        return ctx.zero()
    T = np.stack([feedback(h).levels[ell] for h in basis], axis=1)
    if ctx.exact:
        coeffs = _linalg.gram_dual(T).dot(target)
    else:
        coeffs = np.linalg.lstsq(T.astype(float), np.asarray(target, dtype=float), rcond=None)[0]
    out = ctx.zero()
    for c, h in zip(coeffs, basis):
        out = out + h.scale(c)
    return out


def young_lift(surface, ctx: CrossedModuleContext, rect: Rect | None = None) -> OmegaValue:
    """Levels 2 and 3 from the boundary data; the level-3 kernel part comes from quadrature."""
    _check_ctx(surface, ctx)
    if ctx.N not in (2, 3):
        raise ValueError("young_lift handles N in {2, 3}; use sewing.extend_level beyond")
    if rect is None:
        rect = surface.full_rect() if isinstance(surface, SurfaceGrid) else Rect.unit()
    L = boundary_logsig(surface, rect, ctx.N, ctx.exact)
    out = _feedback_section(ctx, 2, L.levels[2])
    if ctx.N == 3:
        q3 = omega_quadrature(surface, rect, ctx).value.truncate_levels(3)
        q3 = q3 - q3.truncate_levels(2)
        residual = L.levels[3] - feedback(q3).levels[3]
        out = out + q3 + _feedback_section(ctx, 3, residual)
    return OmegaValue(out, rect, "lifted")


__all__ = [
    "Rect", "LinearSurface", "AffineSurface", "SurfaceGrid", "OmegaValue", "GridAlignmentError",
    "jacobian_minor", "newton_cotes", "omega_quadrature", "cell_germ", "combine_horizontal",
    "combine_vertical", "fold_cells", "chen_assemble", "chen_residual", "boundary_images",
    "boundary_logsig", "stokes_check", "young_lift", "MAX_QUADRATURE_LEVEL",
]
