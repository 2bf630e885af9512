"""Log-signatures of paths (1-cocycles) for the constant form a = sum Z_i dx^i."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from sympy import bernoulli

from .free_lie import BracketTree, first_kind_coordinates, generate_lyndon
from .tensor_algebra import (
    Scalar,
    TensorSeries,
    commutator,
    concat_product,
    exp_t,
    log_t,
)


@dataclass(frozen=True)
class PathContext:
    n: int
    N: int
    exact: bool = True


@dataclass(frozen=True)
class PLPath:
    """Piecewise-linear path through the given points."""

    points: tuple

    def __init__(self, points: Sequence[Sequence[Scalar]]):
        pts = tuple(tuple(p) for p in points)
        if not pts:
            raise ValueError("a path needs at least one point")
        if len({len(p) for p in pts}) != 1:
            raise ValueError("points of mixed dimension")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def increments(self) -> list[tuple]:
        return [tuple(b - a for a, b in zip(p, q)) for p, q in zip(self.points, self.points[1:])]

    def reversed(self) -> "PLPath":
        return PLPath(self.points[::-1])

    def concat(self, other: "PLPath") -> "PLPath":
        """Translate `other` so that it starts where `self` ends, then join."""
        end = self.points[-1]
        start = other.points[0]
        shifted = [tuple(e + (x - s) for e, x, s in zip(end, p, start)) for p in other.points]
        return PLPath(self.points + tuple(shifted[1:]))


@dataclass(frozen=True)
class PathLogSig:
    series: TensorSeries

    @property
    def n(self) -> int:
        return self.series.n

    @property
    def N(self) -> int:
        return self.series.N

    def lyndon_coordinates(self) -> dict[BracketTree, Scalar]:
        return first_kind_coordinates(self.series, generate_lyndon(self.n, max(self.N, 1)))


def segment_logsig(delta: Sequence[Scalar], ctx) -> PathLogSig:
    if len(delta) != ctx.n:
        raise ValueError(f"increment has {len(delta)} entries, expected {ctx.n}")
    return PathLogSig(TensorSeries.from_vector(delta, ctx.N, ctx.exact))


def path_signature(path: PLPath | Sequence, ctx) -> TensorSeries:
    """Group-like signature: ordered product of segment exponentials."""
    path = path if isinstance(path, PLPath) else PLPath(path)
    if path.dim != ctx.n:
        raise ValueError(f"path lives in R^{path.dim}, context expects R^{ctx.n}")
    S = TensorSeries.unit(ctx.n, ctx.N, ctx.exact)
    for inc in path.increments():
        if all(x == 0 for x in inc):
            continue
        S = concat_product(S, exp_t(TensorSeries.from_vector(inc, ctx.N, ctx.exact)))
    return S


def path_logsig(path: PLPath | Sequence, ctx) -> PathLogSig:
    return PathLogSig(log_t(path_signature(path, ctx)))


def signed_area(path: PLPath | Sequence, i: int, j: int) -> Scalar:
    """Half the integral of x_i dx_j - x_j dx_i, coordinates taken relative to the start."""
    path = path if isinstance(path, PLPath) else PLPath(path)
    if not 1 <= i < j <= path.dim:
        raise ValueError("need 1 <= i < j <= dim")
    x0 = path.points[0]
    total = 0
    for p, q in zip(path.points, path.points[1:]):
        pi, pj = p[i - 1] - x0[i - 1], p[j - 1] - x0[j - 1]
        qi, qj = q[i - 1] - x0[i - 1], q[j - 1] - x0[j - 1]
        total = total + (pi * qj - pj * qi)
    half = Fraction(1, 2) if isinstance(total, (int, Fraction)) else 0.5
    return total * half


@dataclass(frozen=True)
class _MagnusWeights:
    coeffs: tuple  # B_m / m! for m = 0..N-1


def _magnus_weights(N: int) -> _MagnusWeights:
    out = []
    fact = 1
    for m in range(N):
        if m:
            fact *= m
        b = bernoulli(m)
        out.append(float(b.p) / float(b.q) / fact)
    return _MagnusWeights(tuple(out))


def _magnus_rhs(omega: TensorSeries, A: TensorSeries, weights: _MagnusWeights) -> TensorSeries:
    out = A.scale(weights.coeffs[0])
    term = A
    for c in weights.coeffs[1:]:
        term = commutator(omega, term)
        if term.is_zero():
            break
        if c:
            out = out + term.scale(c)
    return out


def magnus_ode_logsig(sampler: Callable[[float], tuple], ctx, steps: int,
                      t0: float = 0.0, t1: float = 1.0) -> PathLogSig:
    """Integrate Omega' = sum_m B_m/m! ad_Omega^m A(t) by the explicit midpoint rule.

    ``sampler(t)`` returns ``(gamma(t), gamma_dot(t))``; only the derivative is used.
    Bernoulli numbers follow B_1 = +1/2, which is the right sign for dS = S dA.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n, N = ctx.n, ctx.N
    weights = _magnus_weights(N)

    def A(t: float) -> TensorSeries:
        _, vel = sampler(t)
        return TensorSeries.from_vector(np.asarray(vel, dtype=float), N, exact=False)

    omega = TensorSeries.zero(n, N, exact=False)
    h = (t1 - t0) / steps
    for k in range(steps):
        t = t0 + k * h
        k1 = _magnus_rhs(omega, A(t), weights)
        mid = omega + k1.scale(h / 2)
        omega = omega + _magnus_rhs(mid, A(t + h / 2), weights).scale(h)
    return PathLogSig(omega)


def lie_coefficient(L: TensorSeries, i: int, j: int) -> Scalar:
    """Coefficient of [Z_i, Z_j] in the level-2 part of a Lie element."""
    return L.levels[2][(i - 1) * L.n + (j - 1)]


__all__ = [
    "PathContext", "PLPath", "PathLogSig", "segment_logsig", "path_signature", "path_logsig",
    "signed_area", "magnus_ode_logsig", "lie_coefficient",
]
