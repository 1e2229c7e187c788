from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toriq.linalg import (
    DimensionError,
    dot,
    hull_facets,
    lp_min,
    matrix_rank,
    nonneg_solve,
    primitive_part,
    smith_normal_form,
    solve_linear,
)

F = Fraction


class TestSolveLinear:
    def test_identity(self):
        assert solve_linear([[1, 0], [0, 1]], [F(3, 2), F(-1)]) == (F(3, 2), F(-1))

    def test_inconsistent_rank_one(self):
        assert solve_linear([[1, 2], [2, 4]], [1, 3]) is None

    def test_diagonal(self):
        # hand elimination: 2x = 1, 3y = 1
        assert solve_linear([[2, 0], [0, 3]], [1, 1]) == (F(1, 2), F(1, 3))

    def test_underdetermined_zero_free_vars(self):
        x = solve_linear([[1, 1]], [5])
        assert x == (F(5), F(0))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            dot((1, 2), (1, 2, 3))

    @given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3),
                    min_size=3, max_size=3),
           st.lists(st.integers(-5, 5), min_size=3, max_size=3))
    def test_solution_reevaluates(self, M, b):
        x = solve_linear(M, b)
        if x is not None:
            assert all(dot(row, x) == bi for row, bi in zip(M, b))


class TestSmithNormalForm:
    def test_identity(self):
        _, D, _ = smith_normal_form([[1, 0], [0, 1]])
        assert D == [[1, 0], [0, 1]]

    def test_two_by_two(self):
        # row/column reduction by hand: invariant factors 2, 4
        _, D, _ = smith_normal_form([[2, 4], [6, 8]])
        assert [D[0][0], D[1][1]] == [2, 4]

    def test_gcd_row(self):
        _, D, _ = smith_normal_form([[1, 2]])
        assert D == [[1, 0]]

    @given(st.lists(st.lists(st.integers(-9, 9), min_size=2, max_size=4),
                    min_size=2, max_size=4).filter(
        lambda rows: len({len(r) for r in rows}) == 1))
    @settings(max_examples=150)
    def test_unimodular_and_divisibility(self, M):
        from toriq.linalg import det, mat_mul

        U, D, V = smith_normal_form(M)
        assert mat_mul(mat_mul(U, M), V) == D
        assert abs(det(U)) == 1
        assert abs(det(V)) == 1
        diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
        for a, b in zip(diag, diag[1:]):
            if a != 0:
                assert b % a == 0
            else:
                assert b == 0


class TestPrimitivePart:
    def test_gcd_division(self):
        assert primitive_part((2, 4, 6)) == (1, 2, 3)

    def test_sign_preserved(self):
        assert primitive_part((-3, 0)) == (-1, 0)

    def test_already_primitive(self):
        assert primitive_part((5, 7)) == (5, 7)

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            primitive_part((0, 0))


def brute_force_in_cone(generators, x):
    """Independent membership oracle: by Caratheodory, x lies in the cone
    iff some linearly independent subset of size <= dim carries it with
    nonnegative coordinates."""
    if all(a == 0 for a in x):
        return True
    n = len(x)
    for k in range(1, n + 1):
        for sub in combinations(generators, k):
            if matrix_rank(list(sub)) != k:
                continue
            cols = [[g[i] for g in sub] for i in range(n)]
            sol = solve_linear(cols, x)
            if sol is None:
                continue
            if all(dot([g[i] for g in sub], sol) == x[i] for i in range(n)):
                if all(c >= 0 for c in sol):
                    return True
    return False


class TestNonnegSolve:
    def test_coordinate_cone(self):
        assert nonneg_solve([(1, 0), (0, 1)], (2, 3)) == (F(2), F(3))

    def test_outside_cone(self):
        assert nonneg_solve([(1, 0), (0, 1)], (-1, 0)) is None

    def test_rotated_cone(self):
        # 2x2 solve oracle: (2,0) = 1*(1,1) + 1*(1,-1)
        assert nonneg_solve([(1, 1), (1, -1)], (2, 0)) == (F(1), F(1))

    def test_recomposition(self):
        gens = [(1, 2, 0), (0, 1, 1), (1, 0, 1), (2, 1, 1)]
        x = (3, 3, 2)
        c = nonneg_solve(gens, x)
        assert c is not None and all(ci >= 0 for ci in c)
        for i in range(3):
            assert sum(ci * g[i] for ci, g in zip(c, gens)) == x[i]

    @given(st.lists(st.lists(st.integers(-3, 3), min_size=2, max_size=2),
                    min_size=1, max_size=4),
           st.lists(st.integers(-4, 4), min_size=2, max_size=2))
    @settings(max_examples=120)
    def test_against_caratheodory_oracle(self, gens, x):
        gens = [tuple(g) for g in gens]
        got = nonneg_solve(gens, tuple(x))
        expect = brute_force_in_cone(gens, tuple(x))
        assert (got is not None) == expect
        if got is not None:
            for i in range(2):
                assert sum(c * g[i] for c, g in zip(got, gens)) == x[i]
            assert all(c >= 0 for c in got)


class TestLP:
    def test_min_on_square(self):
        res = lp_min([1, 1], [(1, 0), (0, 1), (-1, 0), (0, -1)], [0, 0, 1, 1])
        assert res.status == "optimal" and res.value == 0 and res.point == (F(0), F(0))

    def test_unbounded(self):
        res = lp_min([-1, 0], [(1, 0), (0, 1)], [0, 0])
        assert res.status == "unbounded"

    def test_infeasible(self):
        res = lp_min([1], [(1,), (-1,)], [0, -1])
        assert res.status == "infeasible"

    def test_rational_optimum(self):
        # minimize x over {2x >= 1} scaled: normals primitive, constants rational
        res = lp_min([1, 0], [(1, 0), (0, 1), (-1, -1)], [F(-1, 2), 0, 2])
        assert res.status == "optimal" and res.value == F(1, 2)


class TestHullFacets:
    def test_square(self):
        fs = hull_facets([(0, 0), (1, 0), (0, 1), (1, 1)])
        assert set(fs) == {
            ((1, 0), F(0)), ((0, 1), F(0)), ((-1, 0), F(1)), ((0, -1), F(1)),
        }

    def test_interior_point_ignored(self):
        fs = hull_facets([(0, 0), (2, 0), (0, 2), (1, 1)])
        assert len(fs) == 3

    def test_segment(self):
        fs = hull_facets([(F(-1, 2),), (3,)])
        assert set(fs) == {((1,), F(1, 2)), ((-1,), F(3))}

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            hull_facets([(0, 0), (1, 1), (2, 2)])
