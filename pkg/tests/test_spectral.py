"""Grid, transforms, multipliers, projection and dealiasing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracmag.errors import (
    DimensionMismatch,
    GridMismatch,
    NegativeOrderOnNonzeroMean,
    NonzeroMean,
)
from fracmag.fields import random_field
from fracmag.spectral import (
    Grid,
    SpectralScalar,
    SpectralVectorField,
    _to_spectral,
    curl,
    dealias,
    divergence,
    forward_transform,
    fractional_laplacian,
    full_spectrum,
    gradient,
    half_spectrum,
    inverse_transform,
    leray_project,
    nonlinear_div_tensor,
)

from oracles import direct_spectrum, padded_product

TWO_PI = 2 * math.pi


def _rel(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


class TestGrid:
    def test_shapes_and_spacing(self):
        g = Grid(2, 16)
        assert g.physical_shape == (16, 16)
        assert g.spectral_shape == (16, 9)
        assert g.dx == pytest.approx(TWO_PI / 16)
        assert g.cell_volume == pytest.approx((TWO_PI / 16) ** 2)
        assert g.dealias_cutoff == 5

    @pytest.mark.parametrize("d,n", [(1, 16), (4, 8), (2, 7), (2, 6), (3, 15)])
    def test_rejects_bad_grids(self, d, n):
        with pytest.raises(ValueError):
            Grid(d, n)

    def test_multiplicity_counts_full_spectrum(self):
        for d, n in [(2, 8), (3, 8), (2, 12)]:
            g = Grid(d, n)
            assert g.multiplicity.sum() == n**d

    def test_kvec_zeroes_nyquist_only(self):
        g = Grid(2, 8)
        nyq = np.abs(g.lattice) == 4
        assert np.all(g.kvec[nyq] == 0)
        assert np.all(g.kvec[~nyq] == g.lattice[~nyq])

    def test_grid_is_hashable_and_comparable(self):
        assert Grid(2, 8) == Grid(2, 8)
        assert len({Grid(2, 8), Grid(2, 8), Grid(3, 8)}) == 2


class TestTransforms:
    def test_cosine_coefficient(self):
        g = Grid(2, 16)
        x1, _ = g.coords()
        f = forward_transform(np.cos(x1), g)
        # f_hat(+-1, 0) = (2 pi)^{-1} * (2 pi)^2 / 2 = pi
        assert f.coeffs[1, 0] == pytest.approx(math.pi, abs=1e-14)
        assert f.coeffs[15, 0] == pytest.approx(math.pi, abs=1e-14)
        c = f.coeffs.copy()
        c[1, 0] = c[15, 0] = 0
        assert np.max(np.abs(c)) < 1e-14

    def test_zero_field(self):
        g = Grid(3, 8)
        f = forward_transform(np.zeros(g.physical_shape), g)
        assert not np.any(f.coeffs)

    @pytest.mark.parametrize("d", [2, 3])
    def test_matches_direct_sum(self, d):
        g = Grid(d, 8)
        rng = np.random.default_rng(3)
        vals = rng.standard_normal(g.physical_shape)
        ref = direct_spectrum(vals)
        got = forward_transform(vals, g).full_spectrum()
        assert _rel(got, ref) < 1e-12

    def test_round_trip(self):
        g = Grid(3, 8)
        vals = np.random.default_rng(1).standard_normal(g.physical_shape)
        back = inverse_transform(forward_transform(vals, g))
        assert _rel(back, vals) < 1e-12

    def test_rejects_wrong_shape_and_nonfinite(self):
        g = Grid(2, 8)
        with pytest.raises(DimensionMismatch):
            forward_transform(np.zeros((8, 9)), g)
        bad = np.zeros((8, 8))
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            forward_transform(bad, g)

    def test_parseval(self):
        g = Grid(2, 16)
        vals = np.random.default_rng(2).standard_normal(g.physical_shape)
        f = forward_transform(vals, g)
        spec = float(np.sum(g.multiplicity * np.abs(f.coeffs) ** 2))
        phys = float(np.sum(vals**2) * g.cell_volume)
        assert spec == pytest.approx(phys, rel=1e-10)

    def test_full_half_round_trip(self):
        g = Grid(3, 8)
        c = _to_spectral(g, np.random.default_rng(0).standard_normal(g.physical_shape))
        full = full_spectrum(g, c)
        assert np.array_equal(half_spectrum(g, full), c)
        axes = tuple(range(g.d))
        ref = np.fft.fftn(np.fft.irfftn(c, s=g.physical_shape, axes=axes), axes=axes)
        assert _rel(full, ref) < 1e-12

    def test_hermitian_symmetry(self):
        g = Grid(2, 8)
        f = forward_transform(np.random.default_rng(5).standard_normal(g.physical_shape), g)
        full = f.full_spectrum()
        neg = full[np.ix_((-np.arange(8)) % 8, (-np.arange(8)) % 8)]
        assert np.max(np.abs(full - np.conj(neg))) < 1e-12
        assert f.hermitian_defect() < 1e-12


class TestFractionalLaplacian:
    def test_eigenfunction(self):
        g = Grid(2, 16)
        x1, x2 = g.coords()
        f = forward_transform(np.cos(x1 + x2), g)
        out = fractional_laplacian(f, 1.0)
        assert _rel(out.coeffs, math.sqrt(2) * f.coeffs) < 1e-14

    def test_zero_order_is_identity(self):
        g = Grid(2, 8)
        f = SpectralScalar(g, random_field(g, np.random.default_rng(0), 2).coeffs[0])
        assert np.array_equal(fractional_laplacian(f, 0).coeffs, f.coeffs)

    def test_inverse_orders_cancel(self):
        g = Grid(3, 8)
        f = SpectralScalar(g, random_field(g, np.random.default_rng(1), 3).coeffs[1])
        back = fractional_laplacian(fractional_laplacian(f, -0.7), 0.7)
        assert _rel(back.coeffs, f.coeffs) < 1e-12

    def test_negative_order_needs_zero_mean(self):
        g = Grid(2, 8)
        f = forward_transform(np.ones(g.physical_shape), g)
        with pytest.raises(NegativeOrderOnNonzeroMean):
            fractional_laplacian(f, -1.0)
        assert isinstance(NegativeOrderOnNonzeroMean("x"), NonzeroMean)

    def test_positive_order_kills_mean(self):
        g = Grid(2, 8)
        f = forward_transform(np.ones(g.physical_shape), g)
        assert fractional_laplacian(f, 0.5).coeffs[0, 0] == 0

    @settings(max_examples=25, deadline=None)
    @given(g1=st.floats(-2, 2), g2=st.floats(-2, 2), seed=st.integers(0, 2**16))
    def test_semigroup_of_orders(self, g1, g2, seed):
        g = Grid(2, 8)
        f = SpectralScalar(g, random_field(g, np.random.default_rng(seed), 2).coeffs[0])
        lhs = fractional_laplacian(fractional_laplacian(f, g1), g2)
        rhs = fractional_laplacian(f, g1 + g2)
        assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-12 * np.max(np.abs(f.coeffs)) * 2 ** (
            abs(g1) + abs(g2)
        ) * 8


class TestLeray:
    def test_gradients_are_annihilated(self):
        g = Grid(2, 16)
        x1, x2 = g.coords()
        phi = forward_transform(np.sin(x1 + x2), g)
        out = leray_project(gradient(phi))
        assert np.max(np.abs(out.coeffs)) < 1e-14

    def test_divergence_free_unchanged(self):
        g = Grid(3, 8)
        v = random_field(g, np.random.default_rng(2), 3)
        assert _rel(leray_project(v).coeffs, v.coeffs) < 1e-14

    def test_output_divergence_free_and_idempotent(self):
        g = Grid(3, 8)
        v = random_field(g, np.random.default_rng(3), 3, divergence_free=False)
        pv = leray_project(v)
        assert pv.divergence_defect() < 1e-14
        assert _rel(leray_project(pv).coeffs, pv.coeffs) < 1e-14
        k = g.kvec
        assert np.max(np.abs(np.sum(k * pv.coeffs, axis=0))) < 1e-12

    def test_contraction(self):
        g = Grid(2, 16)
        v = random_field(g, np.random.default_rng(4), 5, divergence_free=False)
        pv = leray_project(v)
        nv = np.sum(g.multiplicity * np.abs(v.coeffs) ** 2)
        npv = np.sum(g.multiplicity * np.abs(pv.coeffs) ** 2)
        assert npv <= nv

    def test_rejects_nonzero_mean(self):
        g = Grid(2, 8)
        c = np.zeros((2, *g.spectral_shape), dtype=complex)
        c[0, 0, 0] = 1.0
        with pytest.raises(NonzeroMean):
            leray_project(SpectralVectorField(g, c))


class TestDealias:
    def test_band_limited_unchanged(self):
        g = Grid(2, 16)
        v = random_field(g, np.random.default_rng(0), 4)
        assert np.array_equal(dealias(v).coeffs, v.coeffs)

    def test_nyquist_mode_removed(self):
        g = Grid(2, 16)
        x1, _ = g.coords()
        f = forward_transform(np.cos(8 * x1), g)
        assert np.max(np.abs(f.coeffs)) > 1
        assert not np.any(dealias(f).coeffs)

    @pytest.mark.parametrize("d", [2, 3])
    def test_product_matches_padded_transform(self, d):
        n = 16 if d == 2 else 12
        g = Grid(d, n)
        rng = np.random.default_rng(7)
        a = random_field(g, rng, g.dealias_cutoff)
        c = random_field(g, rng, g.dealias_cutoff)
        got = nonlinear_div_tensor(a, c).full_spectrum()
        fa, fc = a.full_spectrum(), c.full_spectrum()
        k = np.stack(np.meshgrid(*([np.fft.fftfreq(n, 1.0 / n)] * d), indexing="ij"))
        keep = np.all(np.abs(k) <= g.dealias_cutoff, axis=0)
        k[np.abs(k) == n // 2] = 0
        ref = np.zeros_like(got)
        for j in range(d):
            for i in range(d):
                ref[j] += 1j * k[i] * padded_product(fa[i], fc[j], n)
        ref *= keep
        assert _rel(got, ref) < 1e-12


class TestNonlinearDivTensor:
    def test_zero_input(self):
        g = Grid(2, 8)
        a = SpectralVectorField.zeros(g)
        c = random_field(g, np.random.default_rng(0), 2)
        assert not np.any(nonlinear_div_tensor(a, c).coeffs)

    def test_shear_self_interaction_vanishes(self):
        g = Grid(2, 16)
        _, x2 = g.coords()
        a = SpectralVectorField.from_physical(g, np.stack([np.sin(x2), 0 * x2]))
        assert np.max(np.abs(nonlinear_div_tensor(a, a).coeffs)) < 1e-14

    def test_two_mode_convolution(self):
        # a = (sin x2, 0), c = (0, cos x1): (a.grad) c = (0, 0) ; Div(a (x) c)_2 = d_1(a_1 c_2)
        # a_1 c_2 = sin x2 cos x1 -> d_1 gives -sin x1 sin x2
        g = Grid(2, 16)
        x1, x2 = g.coords()
        a = SpectralVectorField.from_physical(g, np.stack([np.sin(x2), 0 * x2]))
        c = SpectralVectorField.from_physical(g, np.stack([0 * x1, np.cos(x1)]))
        out = nonlinear_div_tensor(a, c).physical()
        assert np.max(np.abs(out[0])) < 1e-14
        assert np.max(np.abs(out[1] + np.sin(x1) * np.sin(x2))) < 1e-13

    def test_grid_mismatch(self):
        a = SpectralVectorField.zeros(Grid(2, 8))
        c = SpectralVectorField.zeros(Grid(2, 16))
        with pytest.raises(GridMismatch):
            nonlinear_div_tensor(a, c)


class TestDerivatives:
    def test_curl_of_abc_is_itself(self):
        g = Grid(3, 16)
        x1, x2, x3 = g.coords()
        b = np.stack([np.sin(x3) + np.cos(x2), np.sin(x1) + np.cos(x3), np.sin(x2) + np.cos(x1)])
        v = SpectralVectorField.from_physical(g, b)
        assert _rel(curl(v).coeffs, v.coeffs) < 1e-14
        assert np.max(np.abs(divergence(v).coeffs)) < 1e-12

    def test_curl_needs_3d(self):
        with pytest.raises(DimensionMismatch):
            curl(SpectralVectorField.zeros(Grid(2, 8)))

    def test_real_outputs_remain_real(self):
        g = Grid(2, 8)
        f = forward_transform(np.random.default_rng(0).standard_normal(g.physical_shape), g)
        grad = gradient(f)
        assert grad.hermitian_defect() < 1e-11


def test_arithmetic_checks_grids():
    a = SpectralVectorField.zeros(Grid(2, 8))
    b = SpectralVectorField.zeros(Grid(2, 16))
    with pytest.raises(GridMismatch):
        a + b
    c = a + a * 2.0 - a / 4.0
    assert isinstance(c, SpectralVectorField)
    assert (-c).coeffs.shape == a.coeffs.shape
