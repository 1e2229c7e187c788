import random
from fractions import Fraction

import pytest

from toriq.fans import Fan, star_subdivision, validate, walls
from toriq.intersection import (
    TorusDivisor,
    anticanonical,
    ch2_dot_surface,
    curve_number,
    div_char,
    intersect_once,
    is_2fano,
    is_ample,
    is_fano,
    move_divisor,
    nef_threshold,
    prime_divisor,
    quotient_index,
)
from conftest import hirzebruch_fan

F = Fraction


class TestDivChar:
    def test_p2(self, p2):
        assert div_char(p2, (1, 0)).coeffs == (F(1), F(0), F(-1))

    def test_zero(self, p2):
        assert div_char(p2, (0, 0)).coeffs == (F(0),) * 3

    def test_p1p1(self, p1p1):
        assert div_char(p1p1, (2, 3)).coeffs == (F(2), F(3), F(-2), F(-3))


class TestMoveDivisor:
    def test_p1p1(self, p1p1):
        moved = move_divisor(p1p1, 0, (0, 1))
        assert moved.coeffs == (F(0), F(0), F(1), F(0))

    def test_p2(self, p2):
        moved = move_divisor(p2, 0, (0, 1))
        assert moved.coeffs == (F(0), F(0), F(1))

    def test_singular_rational_character(self, singular_fan):
        # rays 3, 4 span a singular cone; the solved character is rational
        moved = move_divisor(singular_fan, 3, (3, 4))
        assert moved.coeffs[3] == 0 and moved.coeffs[4] == 0
        assert any(c.denominator > 1 for c in moved.coeffs)

    def test_singular_character_relation(self, singular_fan):
        # D_{ray3} + div(chi^(0,-1,0)) = D_{ray4} on the singular fan
        d = div_char(singular_fan, (0, -1, 0))
        lhs = prime_divisor(singular_fan, 3) + d
        assert lhs.coeffs == prime_divisor(singular_fan, 4).coeffs

    def test_ray_not_in_cone(self, p2):
        with pytest.raises(ValueError):
            move_divisor(p2, 2, (0, 1))


class TestIntersectOnce:
    def test_smooth_coefficient_one(self, p2):
        c = intersect_once(p2, prime_divisor(p2, 0), (1,))
        assert dict(c.terms) == {(0, 1): F(1)}

    def test_quotient_index_two(self):
        fan = Fan(2, ((1, 2), (1, 0)), ((0, 1),))
        assert quotient_index(fan, (0,), (0, 1), 1) == 2

    def test_singular_anticanonical_curve(self, singular_fan):
        assert curve_number(singular_fan, anticanonical(singular_fan), (3, 4)) == 1


class TestCurveNumber:
    def test_p2_anticanonical_line(self, p2):
        assert curve_number(p2, anticanonical(p2), (0,)) == 3

    def test_p1p1_fiber_self_intersection(self, p1p1):
        D = prime_divisor(p1p1, 0)
        assert curve_number(p1p1, D, (0,)) == 0

    def test_f1_minus_one_curve(self):
        f1 = hirzebruch_fan(1)
        assert curve_number(f1, anticanonical(f1), (1,)) == 1

    def test_matches_relation_pairing_on_smooth(self, corpus_fans):
        rng = random.Random(5)
        for fan in corpus_fans:
            if not validate(fan).smooth:
                continue
            coeffs = tuple(F(rng.randint(-4, 9)) for _ in fan.rays)
            D = TorusDivisor(fan, coeffs)
            for w in walls(fan):
                pairing = sum(c * r for c, r in zip(coeffs, w.relation))
                assert curve_number(fan, D, w.wall_rays) == pairing


class TestPrincipalTriviality:
    def test_all_corpus_fans(self, corpus_fans):
        for fan in corpus_fans:
            for k in range(fan.rank):
                m = tuple(1 if j == k else 0 for j in range(fan.rank))
                D = div_char(fan, m)
                for w in walls(fan):
                    assert curve_number(fan, D, w.wall_rays) == 0


class TestCh2:
    def test_p4_euler_value(self, p4):
        # Euler-sequence value (n+1)/2 on every invariant surface
        from toriq.fans import faces_of_dim

        for sigma in faces_of_dim(p4, 2):
            assert ch2_dot_surface(p4, sigma) == F(5, 2)

    def test_surface_case_is_total_square(self, p2):
        total = sum(
            curve_number(p2, prime_divisor(p2, i), (i,)) for i in range(3)
        )
        assert ch2_dot_surface(p2, ()) == total / 2 == F(3, 2)

    def test_singular_example_value(self, singular_fan):
        assert ch2_dot_surface(singular_fan, (4,)) == F(1, 4)

    def test_character_twist_invariance(self, bl_p1p1):
        # replacing D_i by D_i - div(chi^m) before squaring changes nothing;
        # rerun the squared pairing with one prime divisor twisted by hand
        rng = random.Random(11)
        fan = bl_p1p1
        sigma = ()
        base = ch2_dot_surface(fan, sigma)
        for _ in range(5):
            m = (rng.randint(-2, 2), rng.randint(-2, 2))
            i = rng.randrange(len(fan.rays))
            Di = prime_divisor(fan, i) - div_char(fan, m)
            total = F(0)
            for j in range(len(fan.rays)):
                D = Di if j == i else prime_divisor(fan, j)
                once = intersect_once(fan, D, sigma)
                total += sum(
                    (b * intersect_once(fan, D, tau).total() for tau, b in once.terms),
                    F(0),
                )
            assert total / 2 == base

    def test_wrong_dimension_rejected(self, p4):
        with pytest.raises(ValueError):
            ch2_dot_surface(p4, (0,))


class TestIsFano:
    def test_p2(self, p2):
        v = is_fano(p2)
        assert v.is_fano and v.method == "primitive-collections"

    def test_f2_not_fano(self):
        f2 = hirzebruch_fan(2)
        v = is_fano(f2)
        assert not v.is_fano and v.witnesses

    def test_singular_fano_via_kleiman(self, singular_fan):
        v = is_fano(singular_fan)
        assert v.method == "kleiman"
        assert v.is_fano

    def test_degree_equals_anticanonical_pairing(self, bl_p1p1):
        from toriq.fans import primitive_collections

        mk = anticanonical(bl_p1p1)
        wall_sets = {w.wall_rays for w in walls(bl_p1p1)}
        for c in primitive_collections(bl_p1p1):
            if c.members in wall_sets:
                assert c.degree == curve_number(bl_p1p1, mk, c.members)


class TestIs2Fano:
    def test_p4(self, p4):
        scan = is_2fano(p4)
        assert scan.is_two_fano and scan.minimum == F(5, 2)

    def test_blowup_of_p3_along_line(self, p3):
        bl = star_subdivision(p3, (1, 1, 0))
        scan = is_2fano(bl)
        assert not scan.is_two_fano and scan.minimum < 0

    def test_blowup_of_p4_codim2(self, p4):
        bl = star_subdivision(p4, (1, 1, 0, 0))
        scan = is_2fano(bl)
        assert not scan.is_two_fano and scan.minimum < 0

    def test_surface_case(self, p2):
        scan = is_2fano(p2)
        assert scan.is_two_fano and scan.witness == ()

    def test_fibering_walls_positive_anticanonical(self, corpus_fans):
        from toriq.fans import wall_classification

        for fan in corpus_fans:
            mk = anticanonical(fan)
            for w in walls(fan):
                alpha, _ = wall_classification(fan, w)
                if alpha == 0:
                    assert curve_number(fan, mk, w.wall_rays) > 0


class TestReductionToFiberSurfaces:
    def test_pullback_surface_pairing_equals_intrinsic(self):
        """For a threefold fibered in lines over a surface, pairing the
        squared-divisor sum with the preimage of an invariant base curve
        equals the same computation run intrinsically on the quotient fan
        of that surface."""
        from toriq.fans import star_quotient
        from toriq.polytopes import (
            FacetPresentation,
            cayley_mori_build,
            normal_fan,
        )

        tri = FacetPresentation(
            2, ((1, 0), (0, 1), (-1, -1)), (0, 0, 2), irredundant=True
        )
        tri2 = FacetPresentation(
            2, ((1, 0), (0, 1), (-1, -1)), (0, 1, 3), irredundant=True
        )
        X = normal_fan(cayley_mori_build([tri, tri2], [(1,)]))
        # preimage of the base curve V(v): the divisor of the lifted ray
        lifted = [i for i, r in enumerate(X.rays) if any(r[:2])]
        assert len(lifted) == 3
        for i in lifted:
            surf = ch2_dot_surface(X, (i,))
            qfan, _ = star_quotient(X, (i,))
            assert ch2_dot_surface(qfan, ()) == surf


class TestNefThreshold:
    def test_p2_twice_hyperplane(self, p2):
        L = TorusDivisor(p2, (2, 0, 0))
        assert nef_threshold(p2, L) == F(2, 3)

    def test_blowup_first_example(self, bl_p1p1):
        L = TorusDivisor(bl_p1p1, (2, 1, 2, 1, F(5, 2)))
        assert nef_threshold(bl_p1p1, L) == F(1, 2)

    def test_blowup_second_example_actual_value(self, bl_p1p1):
        # the bundled second example: its printed coefficients yield 1
        # (the recorded 1/2 is inconsistent with them; see the README)
        L = TorusDivisor(bl_p1p1, (6, 5, 6, 5, 2))
        assert is_ample(bl_p1p1, L)
        assert nef_threshold(bl_p1p1, L) == 1

    def test_not_ample_rejected(self, p2):
        with pytest.raises(ValueError):
            nef_threshold(p2, TorusDivisor(p2, (-1, 0, 0)))

    def test_matches_polyhedral_thresholds(self, corpus_polytopes):
        from toriq.polytopes import normal_fan, thresholds

        for P in corpus_polytopes:
            fan = normal_fan(P)
            L = TorusDivisor(fan, P.constants)
            assert nef_threshold(fan, L) == thresholds(P).nef
