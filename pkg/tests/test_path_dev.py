from __future__ import annotations

import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from surfsig.path_dev import (
    PathContext,
    PLPath,
    lie_coefficient,
    magnus_ode_logsig,
    path_logsig,
    path_signature,
    segment_logsig,
    signed_area,
)
from surfsig.tensor_algebra import TensorSeries, bch_t, concat_product

CTX = PathContext(2, 4)
SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]

points = st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=5)


def circle(theta_max):
    return lambda t: ((math.cos(theta_max * t), math.sin(theta_max * t)),
                      (-theta_max * math.sin(theta_max * t), theta_max * math.cos(theta_max * t)))


class TestSegment:
    def test_zero(self):
        assert segment_logsig((0, 0), CTX).series.is_zero()

    def test_unit_vector(self):
        assert segment_logsig((1, 0), CTX).series == TensorSeries.letter(1, 2, 4)

    def test_diagonal(self):
        s = segment_logsig((1, 1, 0), PathContext(3, 2)).series
        assert s == TensorSeries.letter(1, 3, 2) + TensorSeries.letter(2, 3, 2)

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            segment_logsig((1, 2, 3), CTX)


class TestPathLogsig:
    def test_constant_path(self):
        assert path_logsig([(1, 2), (1, 2)], CTX).series.is_zero()

    def test_single_segment(self):
        assert path_logsig([(0, 0), (F(1, 2), 3)], CTX).series == segment_logsig((F(1, 2), 3), CTX).series

    def test_square_loop_area(self):
        L = path_logsig(SQUARE, CTX).series
        assert not L.level_nonzero(1)
        assert lie_coefficient(L, 1, 2) == 1

    def test_lyndon_coordinates(self):
        coords = path_logsig([(0, 0), (1, 0), (1, 1)], PathContext(2, 2)).lyndon_coordinates()
        assert coords == {1: 1, 2: 1, (1, 2): F(1, 2)}

    @given(points, points)
    def test_chen(self, p, q):
        a, b = PLPath(p), PLPath(q)
        lhs = path_logsig(a.concat(b), CTX).series
        assert lhs == bch_t(path_logsig(a, CTX).series, path_logsig(b, CTX).series)

    @given(points)
    def test_backtrack(self, p):
        a = PLPath(p)
        assert path_logsig(a.concat(a.reversed()), CTX).series.is_zero()

    @given(points, st.integers(1, 4))
    def test_subdivision(self, p, k):
        refined = [p[0]]
        for u, v in zip(p, p[1:]):
            refined += [tuple(F(a) + F(j, k) * (b - a) for a, b in zip(u, v)) for j in range(1, k + 1)]
        assert path_logsig(refined, CTX).series == path_logsig(p, CTX).series

    def test_signature_is_group_like_product(self):
        S = path_signature([(0, 0), (1, 0), (1, 2)], CTX)
        assert S == concat_product(path_signature([(0, 0), (1, 0)], CTX), path_signature([(1, 0), (1, 2)], CTX))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            path_logsig([(0, 0, 0), (1, 1, 1)], CTX)


class TestSignedArea:
    def test_unit_square(self):
        assert signed_area(SQUARE, 1, 2) == 1

    def test_reversed(self):
        assert signed_area(PLPath(SQUARE).reversed(), 1, 2) == -1

    def test_translation(self):
        shifted = [(x + 5, y - 2) for x, y in SQUARE]
        assert signed_area(shifted, 1, 2) == 1

    def test_same_index(self):
        with pytest.raises(ValueError):
            signed_area(SQUARE, 1, 1)

    @given(points)
    def test_matches_level_two_for_loops(self, p):
        loop = p + [p[0]]
        L = path_logsig(loop, CTX).series
        assert lie_coefficient(L, 1, 2) == signed_area(loop, 1, 2)


class TestMagnus:
    def test_straight_line_one_step(self):
        L = magnus_ode_logsig(lambda t: ((t, 2 * t), (1.0, 2.0)), CTX, steps=1).series
        ref = segment_logsig((1.0, 2.0), PathContext(2, 4, exact=False)).series
        assert (L - ref).max_abs() < 1e-14

    def test_circle_arc_against_polygon(self):
        arc = circle(math.pi / 2)
        L = magnus_ode_logsig(arc, CTX, steps=400).series
        polygon = [arc(k / 4000)[0] for k in range(4001)]
        ref = path_logsig(polygon, PathContext(2, 4, exact=False)).series
        assert (L - ref).max_abs() < 1e-5

    def test_second_order(self):
        ctx = PathContext(2, 3)
        arc = circle(2.0)
        fine = magnus_ode_logsig(arc, ctx, steps=1024).series
        errs = [(magnus_ode_logsig(arc, ctx, steps=s).series - fine).max_abs() for s in (16, 32, 64)]
        ratios = [errs[i] / errs[i + 1] for i in range(2)]
        assert all(3.5 < r < 4.5 for r in ratios), ratios

    def test_steps_positive(self):
        with pytest.raises(ValueError):
            magnus_ode_logsig(circle(1.0), CTX, steps=0)
