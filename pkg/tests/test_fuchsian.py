import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homoclinic_gl.fuchsian import (
    ExponentScheme,
    exponents_from_differences,
    exponents_from_nu,
    find_resonant_ell,
    kimura_triangularizable,
    resonance_beta1,
    resonance_curve,
)


class TestExponents:
    def test_tangential(self):
        sch = exponents_from_nu(1.0, 6.0)
        assert sch.rho == pytest.approx((1.0, 0.5, 2.5), abs=1e-15)

    def test_normal(self):
        s, b1 = 2.0, 1.3
        sch = exponents_from_nu(s, 2 * b1)
        assert sch.rho[0] == pytest.approx(math.sqrt(s))
        assert sch.rho[2] == pytest.approx(math.sqrt(8 * b1 + 1) / 2)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-3, 50), st.floats(-0.25, 50))
    def test_fuchs_relation(self, nu1, nu2):
        assert exponents_from_nu(nu1, nu2).exponent_sum == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 5))
    def test_from_differences(self, r1, r2, r3):
        sch = exponents_from_differences(r1, r2, r3)
        assert sch.rho == pytest.approx((r1, r2, r3), abs=1e-12)
        assert sch.exponent_sum == pytest.approx(1.0, abs=1e-12)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            exponents_from_nu(0.0, 1.0)
        with pytest.raises(ValueError):
            exponents_from_nu(-1.0, 1.0)
        with pytest.raises(ValueError):
            exponents_from_nu(1.0, -0.3)


def sch_combos(sch):
    return kimura_triangularizable(sch).combinations.values()


class TestKimura:
    def test_tangential_true(self):
        v = kimura_triangularizable(exponents_from_differences(1.0, 0.5, 2.5))
        assert v.triangularizable and v.witness == "rho1-rho2+rho3"
        assert v.value == pytest.approx(3.0)

    def test_irrational_false(self):
        v = kimura_triangularizable(exponents_from_differences(math.sqrt(2), 0.5, 0.5))
        assert not v.triangularizable and v.witness is None
        assert sorted(v.combinations.values()) == pytest.approx(
            sorted([math.sqrt(2) + 1, -math.sqrt(2) + 1, math.sqrt(2), math.sqrt(2)])
        )

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 6), st.floats(0, 6), st.floats(0, 6), st.sampled_from([(-1, 1, 1), (1, -1, 1), (1, 1, -1)]))
    def test_sign_flip_invariance(self, r1, r2, r3, flip):
        a = kimura_triangularizable(exponents_from_differences(r1, r2, r3)).triangularizable
        b = kimura_triangularizable(
            exponents_from_differences(flip[0] * r1, flip[1] * r2, flip[2] * r3)
        ).triangularizable
        assert a == b

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1.2, 4.0), st.floats(0.0, 60.0), st.booleans(), st.integers(0, 8))
    def test_tolerance_stable(self, s, b1, snap, ell):
        if snap:
            b1 = resonance_beta1(s, ell)
        sch = exponents_from_nu(s, 2 * b1)
        gap = min(abs(v - (2 * math.floor((v - 1) / 2 + 0.5) + 1)) for v in sch_combos(sch))
        if not snap and gap < 1e-5:
            return  # a random draw this close to resonance cannot be classified robustly
        assert kimura_triangularizable(sch, 1e-9).triangularizable == kimura_triangularizable(sch, 1e-6).triangularizable

    def test_tol_range(self):
        with pytest.raises(ValueError):
            kimura_triangularizable(ExponentScheme(), tol=0.1)


class TestResonance:
    @pytest.mark.parametrize("ell,value", [(0, 1.7071068), (2, 7.5355339), (4, 17.36396103)])
    def test_reference_values(self, ell, value):
        assert resonance_beta1(2.0, ell) == pytest.approx(value, abs=5e-8)

    def test_ell0_closed(self):
        assert resonance_beta1(2.0, 0) == pytest.approx(1 + math.sqrt(2) / 2, rel=1e-15)

    def test_find(self):
        assert find_resonant_ell(2.0, 1.7071068, 1e-5) == 0
        assert find_resonant_ell(2.0, 1.0, 1e-5) is None

    @pytest.mark.parametrize("s", [1.0, 2.0, 4.0])
    def test_round_trip(self, s):
        for ell in range(9):
            assert find_resonant_ell(s, resonance_beta1(s, ell)) == ell

    def test_negative_ell_accepted(self):
        s = 2.0
        assert find_resonant_ell(s, resonance_beta1(s, -3)) == -3
        assert resonance_beta1(s, -3) == pytest.approx(((2 * math.sqrt(2) - 5) ** 2 - 1) / 8)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1.05, 9.0), st.floats(0.0, 80.0), st.booleans(), st.integers(0, 12))
    def test_equivalence_with_kimura(self, s, b1, snap, ell):
        if snap:
            b1 = resonance_beta1(s, ell)
        resonant = find_resonant_ell(s, b1) is not None
        assert kimura_triangularizable(exponents_from_nu(s, 2 * b1)).triangularizable == resonant

    def test_equivalence_random_200(self, rng):
        hits = 0
        for _ in range(200):
            s = float(rng.uniform(1.2, 4.0))
            if rng.random() < 0.5:
                b1 = resonance_beta1(s, int(rng.integers(0, 9)))
            else:
                b1 = float(rng.uniform(0, 40))
            resonant = find_resonant_ell(s, b1) is not None
            hits += resonant
            assert kimura_triangularizable(exponents_from_nu(s, 2 * b1)).triangularizable == resonant
        assert 50 < hits < 150

    def test_curve(self):
        rows = resonance_curve((0.5, 4.0), [0, 1, 2, 3, 4], 20)
        assert len(rows) == 100
        for s, ell, b1 in rows:
            assert b1 == resonance_beta1(s, ell)
        by_ell = {e: [r[2] for r in rows if r[1] == e] for e in range(5)}
        for e in range(5):
            assert np.all(np.diff(by_ell[e]) > 0)
        for e in range(4):
            assert np.all(np.array(by_ell[e + 1]) > np.array(by_ell[e]))
        assert rows[0][0] == 0.5 and rows[19][0] == 4.0

    def test_curve_preconditions(self):
        with pytest.raises(ValueError):
            resonance_curve((0.0, 1.0), [0], 3)
        with pytest.raises(ValueError):
            resonance_curve((1.0, 2.0), [], 3)
