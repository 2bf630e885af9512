"""Dyadic rectangles, midway partitions, subcontrols and non-commutative sewing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import sympy

from .crossed_module import CrossedModuleContext, HElement, group_distance
from .path_dev import PathContext, path_logsig
from .surface_dev import LinearSurface, Rect, cell_germ, combine_horizontal, combine_vertical
from .tensor_algebra import Scalar, TensorSeries, bch_t

GermFn = Callable[[Rect], HElement]
BoundaryFn = Callable[[Sequence[tuple]], TensorSeries]


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class DyadicRect:
    """Rectangle with integer corners on the grid 2^-scale Z^2."""

    scale: int
    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("scale must be >= 0")
        if not (0 <= self.x0 <= self.x1 <= 2**self.scale and 0 <= self.y0 <= self.y1 <= 2**self.scale):
            raise ValueError(f"corners of {self} leave [0, 2^scale]^2")

    @property
    def W(self) -> int:
        return self.x1 - self.x0

    @property
    def H(self) -> int:
        return self.y1 - self.y0

    @property
    def width(self) -> Fraction:
        return Fraction(self.W, 2**self.scale)

    @property
    def height(self) -> Fraction:
        return Fraction(self.H, 2**self.scale)

    @property
    def area(self) -> Fraction:
        return self.width * self.height

    def refine(self, extra: int = 1) -> "DyadicRect":
        f = 2**extra
        return DyadicRect(self.scale + extra, self.x0 * f, self.y0 * f, self.x1 * f, self.y1 * f)

    def to_rect(self, exact: bool = True) -> Rect:
        d = 2**self.scale
        c = [Fraction(v, d) for v in (self.x0, self.y0, self.x1, self.y1)]
        if not exact:
            c = [float(v) for v in c]
        return Rect(*c)

    def is_elementary(self) -> bool:
        return self.W == 1 and self.H == 1


def _sides(r) -> tuple[Fraction, Fraction]:
    if isinstance(r, DyadicRect):
        w, h = r.width, r.height
    else:
        w, h = r.width, r.height
    return (w, h) if w >= h else (h, w)


def eccentricity(r) -> Scalar:
    """a / b with a >= b the side lengths; infinite when b = 0."""
    a, b = _sides(r)
    if b == 0:
        return math.inf
    return Fraction(a) / Fraction(b) if not isinstance(a, float) else a / b


def midway_partition(r: DyadicRect) -> tuple[DyadicRect, DyadicRect, str]:
    """Split into (A, B, orientation); A is left of B ("horizontal") or below it ("vertical")."""
    if r.W == 0 or r.H == 0:
        raise ValueError("zero-area rectangle has no midway partition")
    if r.is_elementary():
        f = r.refine()
        mid = f.x0 + 1
        return (DyadicRect(f.scale, f.x0, f.y0, mid, f.y1), DyadicRect(f.scale, mid, f.y0, f.x1, f.y1), "horizontal")
    if r.W >= r.H:
        mid = r.x0 + (r.W + 1) // 2
        return (DyadicRect(r.scale, r.x0, r.y0, mid, r.y1), DyadicRect(r.scale, mid, r.y0, r.x1, r.y1), "horizontal")
    mid = r.y0 + (r.H + 1) // 2
    return (DyadicRect(r.scale, r.x0, r.y0, r.x1, mid), DyadicRect(r.scale, r.x0, mid, r.x1, r.y1), "vertical")


def _bounds(r, scale: int | None = None) -> tuple:
    if isinstance(r, DyadicRect):
        if scale is not None:
            f = 2 ** (scale - r.scale)
            return r.x0 * f, r.y0 * f, r.x1 * f, r.y1 * f
        rr = r.to_rect()
        return rr.s1, rr.s2, rr.t1, rr.t2
    return r.s1, r.s2, r.t1, r.t2


def is_partition(r, parts) -> bool:
    A, B = parts
    scale = None
    if all(isinstance(x, DyadicRect) for x in (r, A, B)):
        scale = max(r.scale, A.scale, B.scale)
    ra, rb, rr = _bounds(A, scale), _bounds(B, scale), _bounds(r, scale)
    horiz = ra[2] == rb[0] and ra[1] == rb[1] == rr[1] and ra[3] == rb[3] == rr[3] and ra[0] == rr[0] and rb[2] == rr[2]
    vert = ra[3] == rb[1] and ra[0] == rb[0] == rr[0] and ra[2] == rb[2] == rr[2] and ra[1] == rr[1] and rb[3] == rr[3]
    return horiz or vert


def is_balanced(r, parts) -> bool:
    if not is_partition(r, parts):
        raise ValueError("the two pieces do not partition the rectangle")
    A, B = parts
    worst = max(eccentricity(A), eccentricity(B))
    return worst <= max(3, Fraction(2, 3) * eccentricity(r))


@dataclass(frozen=True)
class SubcontrolParams:
    theta: Fraction = Fraction(3, 2)
    lam: Fraction = Fraction(2)
    zeta: Fraction = Fraction(1)
    e: Fraction = Fraction(3)

    def __post_init__(self):
        for name in ("theta", "lam", "zeta", "e"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not (self.theta > 1 and self.lam > 1 and self.zeta >= 0 and self.lam >= self.zeta
                and 2 * self.theta >= self.lam + self.zeta and self.e >= 3):
            raise ValueError(f"invalid subcontrol parameters {self}")


def subcontrol_eval(p: SubcontrolParams, r) -> sympy.Expr:
    """F(r) = (ab)^theta if E <= e, else a^lambda b^zeta (exact sympy value)."""
    a, b = _sides(r)
    a, b = sympy.Rational(a), sympy.Rational(b)
    if b == 0:
        return sympy.Integer(0) if p.zeta > 0 or a == 0 else a ** sympy.Rational(p.lam)
    if a / b <= sympy.Rational(p.e):
        return (a * b) ** sympy.Rational(p.theta)
    return a ** sympy.Rational(p.lam) * b ** sympy.Rational(p.zeta)


@dataclass
class AuditReport:
    scale: int
    rectangles: int
    all_balanced: bool
    max_ratio: sympy.Expr
    max_ratio_shape: tuple[int, int]
    min_area_fraction: Fraction

    @property
    def L(self) -> float:
        return float(self.max_ratio)


def subcontrol_audit(scale: int = 5, params: SubcontrolParams | None = None) -> AuditReport:
    """Check balance, superadditivity and the area bound for every dyadic rectangle at ``scale``."""
    params = params or SubcontrolParams()
    side = 2**scale
    # balance, area fractions and F ratios depend on the shape only
    shapes: dict[tuple[int, int], tuple] = {}
    count = 0
    all_balanced = True
    min_frac = Fraction(1)
    for x0 in range(side):
        for x1 in range(x0 + 1, side + 1):
            for y0 in range(side):
                for y1 in range(y0 + 1, side + 1):
                    r = DyadicRect(scale, x0, y0, x1, y1)
                    A, B, _ = midway_partition(r)
                    count += 1
                    if not is_partition(r, (A, B)):
                        raise AssertionError(f"midway pieces of {r} do not partition it")
                    key = (r.W, r.H)
                    if key not in shapes:
                        balanced = is_balanced(r, (A, B))
                        frac = min(A.area / r.area, B.area / r.area)
                        shapes[key] = (r, A, B, balanced, frac)
                    all_balanced &= shapes[key][3]
                    min_frac = min(min_frac, shapes[key][4])
    best, best_shape = None, None
    for key, (r, A, B, _, _) in shapes.items():
        ratio = (subcontrol_eval(params, A) + subcontrol_eval(params, B)) / subcontrol_eval(params, r)
        if best is None or (ratio - best).is_positive:
            best, best_shape = ratio, key
    return AuditReport(scale, count, all_balanced, sympy.radsimp(best), best_shape, min_frac)


# ------------------------------------------------------------------ 2D sewing
@dataclass
class SewDiagnostics:
    distances: list = field(default_factory=list)
    converged: bool = False
    steps: int = 0

    @property
    def ratios(self) -> list:
        d = self.distances
        return [d[k + 1] / d[k] if d[k] else (0.0 if not d[k + 1] else math.inf) for k in range(len(d) - 1)]


def _edge_logsig(boundary: BoundaryFn, points, cache: dict, key) -> TensorSeries:
    if key not in cache:
        cache[key] = boundary(points)
    return cache[key]


def sew_2d(germ: GermFn, boundary: BoundaryFn, r: DyadicRect, ctx: CrossedModuleContext,
           tol: float = 1e-10, n_max: int = 30, translation_invariant: bool = False) -> tuple[HElement, SewDiagnostics]:
    """Iterate W^n(r) = Chen combination of W^{n-1} on the midway halves until successive values agree.

    ``boundary`` maps a polygon in parameter space to its log-signature.  With
    ``translation_invariant`` the memo is keyed on the rectangle's shape only.
    """
    exact = ctx.exact
    if r.W == 0 or r.H == 0:
        raise ValueError("zero-area rectangle")
    flat = DyadicRect(r.scale, r.x0, r.y0, r.x0, r.y1)
    if not germ(flat.to_rect(exact)).is_zero():
        raise ValueError("germ is not the identity on zero-area rectangles")
    memo: dict = {}
    edges: dict = {}

    def key(rect: DyadicRect, n: int):
        if translation_invariant:
            return (rect.width, rect.height, n)
        return (rect.to_rect(), n)

    def W(rect: DyadicRect, n: int) -> HElement:
        k = key(rect, n)
        if k in memo:
            return memo[k]
        if n == 0:
            val = germ(rect.to_rect(exact))
        else:
            A, B, how = midway_partition(rect)
            ra = A.to_rect(exact)
            if how == "horizontal":
                pts = [(ra.s1, ra.s2), (ra.t1, ra.s2)]
                edge = _edge_logsig(boundary, pts, edges, ("h", A.width) if translation_invariant else tuple(pts))
                val = combine_horizontal(W(A, n - 1), W(B, n - 1), edge)
            else:
                pts = [(ra.s1, ra.s2), (ra.s1, ra.t2)]
                edge = _edge_logsig(boundary, pts, edges, ("v", A.height) if translation_invariant else tuple(pts))
                val = combine_vertical(W(A, n - 1), W(B, n - 1), edge)
        memo[k] = val
        return val

    diag = SewDiagnostics()
    prev = W(r, 0)
    for n in range(1, n_max + 1):
        cur = W(r, n)
        d = group_distance(prev, cur)
        diag.distances.append(float(d) if not exact else d)
        diag.steps = n
        prev = cur
        if d < tol:
            diag.converged = True
            break
    return prev, diag


def surface_boundary(surface, ctx: CrossedModuleContext) -> BoundaryFn:
    """Log-signature (levels <= N - 2) of the image of a parameter-space polygon."""
    pctx = PathContext(ctx.n, ctx.N - 2, ctx.exact)

    def boundary(points):
        return path_logsig([surface.value(r, q) for r, q in points], pctx).series

    return boundary


def area_germ(surface, ctx: CrossedModuleContext) -> GermFn:
    """exp of the integral of beta: level 2 only."""
    def germ(rect: Rect) -> HElement:
        return cell_germ(surface, rect, ctx)

    return germ


def extend_level(low_germ: GermFn, boundary: BoundaryFn, r: DyadicRect, ctx: CrossedModuleContext,
                 tol: float = 1e-10, n_max: int = 80, translation_invariant: bool = False,
                 chen_tol: float = 1e-12) -> tuple[HElement, SewDiagnostics]:
    """Pad a lower-level cocycle with a zero top level and sew it at the level of ``ctx``.

    The low germ must itself satisfy Chen on the midway partition of ``r``; this
    is spot-checked in its own context before sewing.
    """
    A, B, how = midway_partition(r)
    exact = ctx.exact
    low_whole, low_a, low_b = low_germ(r.to_rect(exact)), low_germ(A.to_rect(exact)), low_germ(B.to_rect(exact))
    low_ctx = low_whole.ctx
    if low_ctx.N >= ctx.N:
        raise ValueError("the low cocycle must live below the target level")
    low_boundary = _truncated_boundary(boundary, low_ctx.N - 2)
    ra = A.to_rect(exact)
    if how == "horizontal":
        glued = combine_horizontal(low_a, low_b, low_boundary([(ra.s1, ra.s2), (ra.t1, ra.s2)]))
    else:
        glued = combine_vertical(low_a, low_b, low_boundary([(ra.s1, ra.s2), (ra.s1, ra.t2)]))
    gap = (glued - low_whole).max_abs()
    if gap > chen_tol:
        raise ValueError(f"low cocycle fails Chen on the midway partition (gap {gap})")

    def germ(rect: Rect) -> HElement:
        return low_germ(rect).to_context(ctx)

    return sew_2d(germ, boundary, r, ctx, tol, n_max, translation_invariant)


def _truncated_boundary(boundary: BoundaryFn, top: int) -> BoundaryFn:
    def inner(points):
        return boundary(points).truncate(max(top, 0))

    return inner


# ------------------------------------------------------------------ 1D sewing
def sew_1d(germ: Callable[[Scalar, Scalar], TensorSeries], s: Scalar, t: Scalar, tol: float = 1e-12,
           n_max: int = 30) -> tuple[TensorSeries, SewDiagnostics]:
    """Dyadic refinement W^n(s,t) = bch(W^{n-1}(s,m), W^{n-1}(m,t)) of a log-germ."""
    for point in (s, t):
        if not germ(point, point).is_zero():
            raise ValueError(f"germ is not the identity at ({point}, {point})")
    memo: dict = {}

    def W(a, b, n):
        if (a, b, n) in memo:
            return memo[(a, b, n)]
        if n == 0:
            val = germ(a, b)
        else:
            m = (a + b) / 2
            val = bch_t(W(a, m, n - 1), W(m, b, n - 1))
        memo[(a, b, n)] = val
        return val

    diag = SewDiagnostics()
    prev = W(s, t, 0)
    for n in range(1, n_max + 1):
        cur = W(s, t, n)
        d = (cur - prev).max_abs()
        diag.distances.append(d)
        diag.steps = n
        prev = cur
        if d < tol:
            diag.converged = True
            break
    return prev, diag


def linear_level2_cocycle(surface: LinearSurface, ctx2: CrossedModuleContext) -> GermFn:
    """Omega at level 2: the area integral of beta, an exact cocycle there."""
    return area_germ(surface, ctx2)


__all__ = [
    "DyadicRect", "SubcontrolParams", "AuditReport", "SewDiagnostics", "NonConvergence", "eccentricity",
    "midway_partition", "is_partition", "is_balanced", "subcontrol_eval", "subcontrol_audit", "sew_2d",
    "sew_1d", "extend_level", "surface_boundary", "area_germ", "linear_level2_cocycle",
]
