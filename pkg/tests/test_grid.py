"""Lattice container, transforms, norms, and serialization."""

import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schrodlab.grid import (
    Field,
    GridSpec,
    field_from_bytes,
    field_to_bytes,
    gaussian_packet,
    hyperplane_norm,
    l2_norm,
    load_field,
    mixed_norm,
    random_band_limited,
    save_field,
    single_mode,
    transform,
    zero_field,
)

SPEC1 = GridSpec(n=1, box_time=np.pi, box_space=np.pi, pts_time=16, pts_space=16)
SPEC2 = GridSpec(n=2, box_time=np.pi, box_space=np.pi, pts_time=16, pts_space=16)


def random_field(spec, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
    return Field(spec, "physical", data)


class TestGridSpec:
    def test_spacings(self):
        assert SPEC2.dt == 2 * np.pi / 16
        assert SPEC2.dtau == 1.0
        assert SPEC2.dxi == 1.0

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            GridSpec(n=1, box_time=1.0, box_space=1.0, pts_time=12, pts_space=16)

    def test_rejects_negative_box(self):
        with pytest.raises(ValueError):
            GridSpec(n=1, box_time=-1.0, box_space=1.0, pts_time=16, pts_space=16)

    def test_resource_cap(self):
        with pytest.raises(ValueError):
            GridSpec(n=3, box_time=1.0, box_space=1.0, pts_time=1024,
                     pts_space=1024, max_points=1 << 20)

    def test_axes_cover_box(self):
        t = SPEC2.t_axis()
        assert t[0] == -np.pi
        assert t[-1] < np.pi


class TestTransforms:
    @pytest.mark.parametrize("spec", [SPEC1, SPEC2])
    def test_plancherel(self, spec):
        f = random_field(spec, 3)
        assert l2_norm(transform(f)) == pytest.approx(l2_norm(f), rel=1e-12)

    @pytest.mark.parametrize("spec", [SPEC1, SPEC2])
    def test_roundtrip(self, spec):
        f = random_field(spec, 4)
        back = transform(transform(f), "inverse")
        assert np.abs(back.data - f.data).max() < 1e-12

    def test_single_mode_is_delta_in_frequency(self):
        f = single_mode(SPEC2, 2, [1, -3])
        coeffs = transform(f).data
        idx = np.unravel_index(np.argmax(np.abs(coeffs)), coeffs.shape)
        assert idx == (2, 1, 16 - 3)
        off = np.abs(coeffs).sum() - np.abs(coeffs[idx])
        assert off < 1e-10

    @given(st.integers(min_value=-8, max_value=7), st.integers(min_value=-8, max_value=7))
    @settings(max_examples=20, deadline=None)
    def test_single_mode_unit_modulus(self, kt, kx):
        f = single_mode(SPEC1, kt, [kx])
        # |e^{i...}| = 1 everywhere, so the weight-free norm counts samples
        assert l2_norm(f) == pytest.approx(np.sqrt(16 * 16), rel=1e-12)
        # and the measure-weighted L2 norm is the box volume square root
        box = np.sqrt(2 * np.pi * 2 * np.pi)
        assert mixed_norm(f, 2, 2) == pytest.approx(box, rel=1e-12)


class TestNorms:
    def test_mixed_norm_2_2_is_weighted_l2(self):
        f = random_field(SPEC2, 5)
        weight = np.sqrt(SPEC2.dt * SPEC2.dx**2)
        assert mixed_norm(f, 2, 2) == pytest.approx(l2_norm(f) * weight, rel=1e-12)

    def test_mixed_norm_scaling(self):
        f = random_field(SPEC2, 6)
        assert mixed_norm(f * 3.0, 4, 3) == pytest.approx(3 * mixed_norm(f, 4, 3), rel=1e-12)

    def test_mixed_norm_infinite_exponent(self):
        f = random_field(SPEC1, 7)
        from schrodlab.symbols import INF

        val = mixed_norm(f, INF, INF)
        assert val == pytest.approx(np.abs(f.data).max())

    def test_holder_interpolation_bound(self):
        # ||f||_{2,2} <= ||f||_{inf,inf}^{1/2} ||f||_{1,1}^{1/2} on a
        # probability-normalized lattice is Cauchy-Schwarz; check the raw
        # inequality with measure weights
        f = random_field(SPEC1, 8)
        from schrodlab.symbols import INF

        l2 = mixed_norm(f, 2, 2)
        linf = mixed_norm(f, INF, INF)
        l1 = mixed_norm(f, 1, 1)
        assert l2**2 <= linf * l1 * (1 + 1e-12)

    def test_hyperplane_norm_fubini(self):
        # summing squared hyperplane norms over all lattice planes
        # recovers the full squared L2 norm
        f = random_field(SPEC2, 9)
        x = SPEC2.x_axis()
        total = sum(hyperplane_norm(f, 1, s) ** 2 for s in x) * SPEC2.dx
        assert total == pytest.approx(mixed_norm(f, 2, 2) ** 2, rel=1e-10)


class TestFactories:
    def test_zero_field(self):
        assert l2_norm(zero_field(SPEC2)) == 0.0

    def test_gaussian_packet_centered(self):
        f = gaussian_packet(SPEC2, 0.0, np.zeros(2), 0.5, 0.5)
        peak = np.unravel_index(np.argmax(np.abs(f.data)), f.data.shape)
        assert peak == (8, 8, 8)

    def test_band_limited_support(self):
        rng = np.random.default_rng(0)
        f = random_band_limited(SPEC2, rng, band_time=3, band_space=3)
        coeffs = transform(f).data
        tau = SPEC2.tau_axis()
        out_band = np.abs(tau) > 3
        assert np.abs(coeffs[out_band]).max() < 1e-12


class TestSerialization:
    def test_roundtrip_bytes(self):
        f = random_field(SPEC2, 11)
        g = field_from_bytes(field_to_bytes(f))
        assert g.spec == f.spec
        assert np.array_equal(g.data, f.data)

    def test_bytes_deterministic(self):
        f = random_field(SPEC2, 12)
        assert field_to_bytes(f) == field_to_bytes(f)

    def test_file_roundtrip(self, tmp_path):
        f = random_field(SPEC1, 13)
        p = tmp_path / "f.slf"
        save_field(f, p)
        g = load_field(p)
        assert np.array_equal(g.data, f.data)

    def test_corrupt_magic_rejected(self):
        f = random_field(SPEC1, 14)
        buf = bytearray(field_to_bytes(f))
        buf[0] = 0
        with pytest.raises(ValueError):
            field_from_bytes(bytes(buf))
