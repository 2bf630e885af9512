from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from surfsig.free_lie import (
    NotLieElementError,
    degree,
    dual_functionals,
    first_kind_coordinates,
    foliage,
    generate_lyndon,
    i_tuples,
    is_lyndon,
    j_tuples,
    lie_from_coordinates,
    parse_tree,
    render_tree,
    shape_counts,
    tree_array,
    tree_to_tensor,
    witt_number,
)
from surfsig.tensor_algebra import TensorSeries, exp_t, log_t, word_index
from tables import TABLE_2


LEVEL3 = [(parse_tree(t), f) for t, f in TABLE_2 if degree(parse_tree(t)) == 3]
LEVEL4 = [(parse_tree(t), f) for t, f in TABLE_2 if degree(parse_tree(t)) == 4]


def functional_vector(f, p, n=3):
    v = np.full(n**p, F(0), dtype=object)
    for w, c in f.items():
        v[word_index(tuple(int(ch) for ch in w), n)] = c
    return v


@pytest.mark.parametrize("n,N,dims", [
    (3, 5, [3, 3, 8, 18, 48]),
    (2, 5, [2, 1, 2, 3, 6]),
    (1, 3, [1, 0, 0]),
])
def test_lyndon_dimensions(n, N, dims):
    basis = generate_lyndon(n, N)
    assert basis.dims() == dims
    assert dims == [witt_number(n, p) for p in range(1, N + 1)]


def test_lyndon_order_and_bracketing():
    basis = generate_lyndon(3, 3)
    words = [e.word for e in basis.levels[3]]
    assert words == sorted(words)
    assert all(is_lyndon(w) for w in words)
    assert [render_tree(t) for t in basis.trees(2)] == ["[1,2]", "[1,3]", "[2,3]"]
    assert render_tree(basis.trees(3)[0]) == "[1,[1,2]]"


class TestTrees:
    def test_leaf(self):
        assert tree_to_tensor(1, 2, 3) == TensorSeries.letter(1, 2, 3)

    def test_pair(self):
        assert tree_to_tensor((1, 2), 2, 3) == TensorSeries.from_words({(1, 2): 1, (2, 1): -1}, 2, 3)

    def test_nested(self):
        expected = TensorSeries.from_words({(1, 1, 2): 1, (1, 2, 1): -2, (2, 1, 1): 1}, 2, 3)
        assert tree_to_tensor((1, (1, 2)), 2, 3) == expected

    def test_degree_too_large(self):
        with pytest.raises(ValueError):
            tree_to_tensor((1, (1, 2)), 2, 2)

    def test_parse_render(self):
        t = parse_tree("[[1, 2],[1,3]]")
        assert t == ((1, 2), (1, 3))
        assert render_tree(t) == "[[1,2],[1,3]]"
        assert foliage(t) == (1, 2, 1, 3) and degree(t) == 4
        with pytest.raises(ValueError):
            parse_tree("[1,2")


class TestFirstKind:
    def test_basis_element(self):
        basis = generate_lyndon(3, 3)
        coords = first_kind_coordinates(tree_to_tensor((1, (1, 2)), 3, 3), basis)
        assert coords == {(1, (1, 2)): 1}

    def test_rejects_non_lie(self):
        with pytest.raises(NotLieElementError) as err:
            first_kind_coordinates(TensorSeries.from_words({(1, 2): 1}, 2, 2), generate_lyndon(2, 2))
        assert err.value.level == 2

    def test_log_of_group_like(self):
        # log(exp(Z1) exp(Z2)) = Z1 + Z2 + 1/2 [Z1,Z2] + 1/12 [Z1,[Z1,Z2]] + 1/12 [[Z1,Z2],Z2]
        from surfsig.tensor_algebra import concat_product
        G = concat_product(exp_t(TensorSeries.letter(1, 2, 3)), exp_t(TensorSeries.letter(2, 2, 3)))
        coords = first_kind_coordinates(log_t(G), generate_lyndon(2, 3))
        assert coords == {1: 1, 2: 1, (1, 2): F(1, 2), (1, (1, 2)): F(1, 12), ((1, 2), 2): F(1, 12)}

    @given(st.data())
    def test_round_trip(self, data):
        n = data.draw(st.integers(1, 3))
        N = data.draw(st.integers(1, 5 if n < 3 else 4))
        basis = generate_lyndon(n, N)
        coeffs = {}
        for p in range(1, N + 1):
            for t in basis.trees(p):
                c = data.draw(st.integers(-4, 4))
                if c:
                    coeffs[t] = F(c, data.draw(st.integers(1, 5)))
        L = lie_from_coordinates(coeffs, n, N)
        assert first_kind_coordinates(L, basis) == coeffs


class TestTable2:
    def test_row_count(self):
        assert len(LEVEL3) == 8 and len(LEVEL4) == 18

    @pytest.mark.parametrize("level_rows,p", [(LEVEL3, 3), (LEVEL4, 4)], ids=["level3", "level4"])
    def test_duality_with_printed_basis(self, level_rows, p):
        trees = [t for t, _ in level_rows]
        for t, f in level_rows:
            v = functional_vector(f, p)
            for s in trees:
                assert v.dot(tree_array(s, 3)) == (1 if s == t else 0), (render_tree(t), render_tree(s))

    def test_level3_matches_solved_duals(self):
        trees = [t for t, _ in LEVEL3]
        solved = dual_functionals(trees, 3)
        for (t, printed), mine in zip(LEVEL3, solved):
            expected = {tuple(int(c) for c in w): v for w, v in printed.items()}
            assert mine == expected, render_tree(t)

    def test_level4_functionals_give_coordinates(self):
        trees = [t for t, _ in LEVEL4]
        rng = np.random.default_rng(7)
        coeffs = [F(int(c)) for c in rng.integers(-5, 6, size=len(trees))]
        vec = sum((c * tree_array(t, 3) for c, t in zip(coeffs, trees)), np.full(81, F(0), dtype=object))
        got = [functional_vector(f, 4).dot(vec) for _, f in LEVEL4]
        assert got == coeffs


class TestShapeCounts:
    def test_n3_p3(self):
        assert shape_counts(3, 3) == (8, 1)

    def test_n3_p5(self):
        assert shape_counts(3, 5) == (24, 6)

    @pytest.mark.parametrize("p", [2, 3, 4, 5, 6])
    def test_n2(self, p):
        # hook-content count for shape (p-1,1) with two letters
        assert shape_counts(2, p) == (p - 1, 0)

    @pytest.mark.parametrize("n,p", [(2, 4), (3, 3), (3, 4), (3, 5), (4, 4)])
    def test_matches_tuple_enumeration(self, n, p):
        assert shape_counts(n, p) == (len(i_tuples(n, p)), len(j_tuples(n, p)))

    def test_invalid(self):
        with pytest.raises(ValueError):
            shape_counts(3, 1)
