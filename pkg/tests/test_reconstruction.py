"""Plane-wave probing and low-frequency potential recovery."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schrodlab.birman_schwinger import Potential, gaussian_potential
from schrodlab.grid import Field, GridSpec
from schrodlab.reconstruction import (
    born_sample,
    freq_parametrization,
    lattice_parametrization,
    reconstruct_potential,
)

SPEC = GridSpec(n=2, box_time=np.pi, box_space=np.pi, pts_time=8, pts_space=64)


def small_potential(eps=0.05, width=0.7):
    return gaussian_potential(SPEC, amplitude=eps, width=width,
                              window=(-np.pi, np.pi - 1e-9))


class TestContinuumParametrization:
    @given(
        st.integers(min_value=-6, max_value=6),
        st.integers(min_value=-6, max_value=6),
        st.integers(min_value=-6, max_value=6),
    )
    @settings(max_examples=50, deadline=None)
    def test_exact_identities(self, tau, x1, x2):
        if x1 == 0 and x2 == 0:
            return
        nu, eta, kappa = freq_parametrization(tau, (x1, x2), 2)
        assert tuple(k - e for e, k in zip(eta, kappa)) == (Fraction(x1), Fraction(x2))
        assert sum(e * e for e in eta) - sum(k * k for k in kappa) == Fraction(tau)
        # nu is nonzero and orthogonal to xi
        assert any(c != 0 for c in nu)
        assert sum(n_ * c for n_, c in zip(nu, (x1, x2))) == 0

    def test_rejects_zero_xi(self):
        with pytest.raises(ValueError):
            freq_parametrization(1, (0, 0), 2)


class TestLatticeParametrization:
    @given(st.integers(min_value=-10, max_value=10),
           st.integers(min_value=-10, max_value=10),
           st.integers(min_value=0, max_value=3))
    @settings(max_examples=60, deadline=None)
    def test_integer_identities(self, x1, x2, shift):
        if shift != 0 and x1 == 0 and x2 == 0:
            return
        tau, eta, kappa = lattice_parametrization((x1, x2), shift)
        assert tuple(k - e for e, k in zip(eta, kappa)) == (x1, x2)
        assert tau == sum(e * e for e in eta) - sum(k * k for k in kappa)
        assert all(isinstance(v, int) for v in eta + kappa) and isinstance(tau, int)

    def test_shift_changes_tau(self):
        t0, _, _ = lattice_parametrization((3, 1), 0)
        t1, _, _ = lattice_parametrization((3, 1), 1)
        assert t0 != t1

    def test_shift_rejects_zero_xi(self):
        with pytest.raises(ValueError):
            lattice_parametrization((0, 0), 1)


class TestBornSample:
    def test_single_coefficient_recovered(self):
        # a potential with one spatial mode: V = eps cos(xi.x)
        eps = 0.02
        x = SPEC.x_axis()
        mesh = np.meshgrid(x, x, indexing="ij")
        bump = eps * np.cos(2 * mesh[0])
        data = np.broadcast_to(bump[None], SPEC.shape).astype(complex)
        V = Potential(Field(SPEC, "physical", data.copy()),
                      (-np.pi, np.pi - 1e-9), radius=np.pi, pair=(2, 2))
        s = born_sample(V, (2, 0), T=0.5, steps=128)
        # the cos splits into e^{+-i 2 x} with coefficient eps/2 each
        assert abs(s.amplitude - eps / 2) < 0.05 * eps
        assert s.born_ok

    def test_born_flag(self):
        V = gaussian_potential(SPEC, amplitude=10.0,
                               window=(-np.pi, np.pi - 1e-9))
        s = born_sample(V, (1, 0), T=0.5, steps=32, born_threshold=0.5)
        assert not s.born_ok

    def test_cache_reused(self):
        V = small_potential()
        cache = {}
        born_sample(V, (2, 0), T=0.5, steps=32, _final_cache=cache)
        assert len(cache) == 1
        # same eta: (2,0) and shifting xi_2 keeps eta_1 component
        born_sample(V, (2, 0), T=0.5, steps=32, _final_cache=cache)
        assert len(cache) == 1


class TestReconstruction:
    def test_small_potential_recovered(self):
        V = small_potential(eps=0.05)
        ref = V.field.data[SPEC.pts_time // 2].real
        est, report = reconstruct_potential(V, freq_radius=6.0, T=0.5,
                                            steps=128, reference=ref)
        assert report["relative_l2_error"] < 0.05
        assert report["n_not_born"] == 0
        # the estimate is essentially real for a real potential
        assert np.abs(est.imag).max() < 0.1 * np.abs(est.real).max()

    def test_error_grows_with_amplitude(self):
        # the Born correction is quadratic: larger eps, larger error
        errs = []
        for eps in (0.2, 0.05):
            V = small_potential(eps=eps)
            ref = V.field.data[SPEC.pts_time // 2].real
            _, report = reconstruct_potential(V, freq_radius=4.0, T=0.5,
                                              steps=64, reference=ref)
            errs.append(report["relative_l2_error"])
        assert errs[1] < errs[0]
