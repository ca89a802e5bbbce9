"""Exponent arithmetic, admissibility, symbols, and the scaling map."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schrodlab.symbols import (
    INF,
    ExponentPair,
    NuVector,
    ScalingMap,
    as_exponent,
    check_admissible,
    conjugate_exponent,
    eval_p,
    eval_p_nu,
    potential_pair_check,
)


class TestExponents:
    def test_as_exponent_fraction(self):
        assert as_exponent("4/3") == Fraction(4, 3)
        assert as_exponent(2) == Fraction(2)
        assert as_exponent("inf") is INF

    def test_rejects_below_one(self):
        with pytest.raises(ValueError):
            as_exponent("1/2")

    def test_conjugate(self):
        assert conjugate_exponent(Fraction(4, 3)) == Fraction(4)
        assert conjugate_exponent(2) == Fraction(2)
        assert conjugate_exponent(1) is INF
        assert conjugate_exponent(INF) == Fraction(1)

    @given(st.integers(min_value=1, max_value=40), st.integers(min_value=1, max_value=40))
    @settings(max_examples=40, deadline=None)
    def test_conjugate_involution(self, a, b):
        p = 1 + Fraction(a, b)
        assert conjugate_exponent(conjugate_exponent(p)) == p


class TestAdmissibility:
    @pytest.mark.parametrize("q,r,n", [
        ("4/3", "4/3", 2),
        (1, 2, 2),
        ("8/7", "8/5", 2),
        (2, "6/5", 3),
        (1, 2, 3),
        ("4/3", "3/2", 3),
    ])
    def test_known_admissible(self, q, r, n):
        ok, dual = check_admissible(q, r, n)
        assert ok
        assert dual is not None and dual.admissible

    @pytest.mark.parametrize("q,r,n", [
        (2, 2, 2),
        ("4/3", "4/3", 3),
        (1, 2.0001, 2),
    ])
    def test_known_inadmissible(self, q, r, n):
        # the float 2.0001 is coerced exactly, so it misses the scaling line
        ok, dual = check_admissible(q, r, n)
        assert not ok and dual is None

    def test_endpoint_exclusion_n2(self):
        # (q, r) = (2, 1) sits on the n=2 scaling line but is excluded
        lhs = 2 - 2 * Fraction(1, 2)
        rhs = 2 * Fraction(1, 1) - Fraction(2, 2)
        assert lhs == rhs
        ok, _ = check_admissible(2, 1, 2)
        assert not ok

    def test_dual_pair_relation(self):
        pair = ExponentPair("4/3", "4/3", 2)
        dual = pair.dual_pair()
        assert dual.q == Fraction(4) and dual.r == Fraction(4)

    def test_potential_pair(self):
        ok, linked = potential_pair_check(2, 2, 2)
        assert ok
        # linked (q, r) satisfies 1/q = (1 + 1/a)/2
        assert linked.q == Fraction(4, 3)
        ok3, linked3 = potential_pair_check(2, 3, 3)
        assert ok3 and linked3.n == 3

    def test_potential_pair_rejections(self):
        ok, _ = potential_pair_check(2, 3, 2)
        assert not ok
        ok, _ = potential_pair_check("inf", 1, 2)
        assert not ok  # excluded endpoint


class TestSymbols:
    def test_eval_p_pointwise(self):
        val = eval_p(3.0, (1.0, 2.0))
        assert val == pytest.approx(3.0 - 5.0 + 2.0j)

    def test_eval_p_broadcast(self):
        tau = np.array([0.0, 1.0])
        out = eval_p(tau[:, None], (np.array([0.0, 1.0])[None, :],))
        assert out.shape == (2, 2)

    def test_eval_p_nu_pointwise(self):
        nu = NuVector([0.0, 4.0])
        val = eval_p_nu(1.0, (1.0, 1.0), nu)
        assert val == pytest.approx(-1.0 - 2.0 + 8.0j)

    def test_nu_requires_nonzero(self):
        with pytest.raises(ValueError):
            NuVector([0.0, 0.0])

    def test_nu_magnitude_axis(self):
        nu = NuVector([0.0, -3.0])
        assert nu.magnitude == 3.0
        assert nu.aligned_axis == 1
        assert (-nu).components == (0.0, 3.0)

    def test_characteristic_set(self):
        # p vanishes (real and imaginary parts) exactly on tau = |xi'|^2,
        # xi_n = 0
        val = eval_p(4.0, (2.0, 0.0))
        assert val == 0.0


class TestScalingMap:
    @pytest.mark.parametrize("nu_comps", [
        (0.0, 8.0),
        (3.0, 4.0),
        (1.0, 0.0, 0.0),
        (1.0, 2.0, 2.0),
    ])
    def test_q_orthogonal_and_aligned(self, nu_comps):
        nu = NuVector(nu_comps)
        Q = ScalingMap(nu).Q
        n = nu.n
        assert np.abs(Q @ Q.T - np.eye(n)).max() < 1e-12
        e_n = np.zeros(n)
        e_n[-1] = 1.0
        assert np.abs(Q @ e_n - nu.direction).max() < 1e-12

    @given(
        st.floats(min_value=-5, max_value=5, allow_nan=False),
        st.floats(min_value=-5, max_value=5, allow_nan=False),
        st.floats(min_value=-5, max_value=5, allow_nan=False),
        st.floats(min_value=0.5, max_value=64.0, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_symbol_identity_random(self, tau, x1, x2, mag):
        nu = NuVector([0.6 * mag, 0.8 * mag])
        assert ScalingMap(nu).check(tau, [x1, x2])

    def test_scale_factor(self):
        nu = NuVector([0.0, 2.0])
        sm = ScalingMap(nu)
        sigma, eta = sm.forward(1.5, [1.0, -1.0])
        lhs = eval_p_nu(sigma, tuple(eta), nu)
        rhs = 16.0 * eval_p(1.5, (1.0, -1.0))
        assert lhs == pytest.approx(rhs, rel=1e-12)
