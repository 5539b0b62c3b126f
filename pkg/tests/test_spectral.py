import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavebilinear.spectral import (
    GridSpec,
    RealField,
    ResourceError,
    SpectralField,
    apply_multiplier,
    dealiased_product,
    evaluate,
    l2_norm_spectral,
    lp_norm_physical,
    padded_size,
    partial_derivative,
    physical_integral,
    product_grid,
    to_physical,
    to_spectral,
)

from conftest import random_band_limited


def brute_product_coeffs(a: np.ndarray, b: np.ndarray) -> dict:
    """Direct convolution of two coefficient arrays (dict keyed by lattice vector)."""
    n = a.shape[0]
    k = np.fft.fftfreq(n, 1.0 / n).astype(int)
    out = {}
    idx = [(i, j) for i in range(n) for j in range(n)]
    for i1, j1 in idx:
        if a[i1, j1] == 0:
            continue
        for i2, j2 in idx:
            if b[i2, j2] == 0:
                continue
            key = (k[i1] + k[i2], k[j1] + k[j2])
            out[key] = out.get(key, 0) + a[i1, j1] * b[i2, j2]
    return out


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(4, 16)
        with pytest.raises(ValueError):
            GridSpec(2, 15)
        with pytest.raises(ValueError):
            GridSpec(2, 6)
        with pytest.raises(ValueError):
            GridSpec(2, 16, 0.0)

    def test_shape_and_volume(self):
        g = GridSpec(3, 8, 2.0)
        assert g.shape == (8, 8, 8)
        assert g.volume == pytest.approx((4 * math.pi) ** 3)
        assert g.max_mode == 3

    def test_wavevectors_scale(self):
        g = GridSpec(2, 16, 0.5)
        assert np.allclose(g.wavevectors(), g.wavenumbers() / 0.5)


class TestTransforms:
    def test_zero(self):
        g = GridSpec(2, 16)
        F = to_spectral(RealField(g, np.zeros(g.shape)))
        assert np.all(F.coeffs == 0)

    def test_single_mode(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        F = to_spectral(RealField(g, np.cos(4 * x1)))
        assert F.coeffs[4, 0] == pytest.approx(0.5, abs=1e-15)
        assert F.coeffs[-4, 0] == pytest.approx(0.5, abs=1e-15)
        rest = F.coeffs.copy()
        rest[4, 0] = rest[-4, 0] = 0
        assert np.max(np.abs(rest)) < 1e-15

    def test_rejects_nonfinite(self):
        g = GridSpec(1, 8)
        a = np.zeros(8)
        a[3] = np.nan
        with pytest.raises(ValueError):
            RealField(g, a)

    def test_round_trip_and_parseval(self, rng):
        for dim, n in ((1, 64), (2, 32), (3, 16)):
            g = GridSpec(dim, n, 1.5)
            F = random_band_limited(g, n // 2 - 1, rng)
            f = to_physical(F)
            back = to_spectral(f)
            assert np.max(np.abs(back.coeffs - F.coeffs)) <= 1e-12 * np.max(np.abs(F.coeffs))
            again = to_physical(back)
            assert np.max(np.abs(again.samples - f.samples)) <= 1e-12 * np.max(np.abs(f.samples))
            assert lp_norm_physical(f) == pytest.approx(l2_norm_spectral(F), rel=1e-12)

    def test_hermitian_and_band(self, rng):
        g = GridSpec(2, 32)
        F = random_band_limited(g, 5, rng)
        assert F.is_hermitian()
        assert F.bandwidth() == 5

    def test_nyquist_rejected(self):
        g = GridSpec(1, 8)
        c = np.zeros(8, complex)
        c[4] = 1
        with pytest.raises(ValueError):
            SpectralField(g, c)

    def test_evaluate_padding_matches(self, rng):
        g = GridSpec(2, 16)
        F = random_band_limited(g, 4, rng)
        fine = evaluate(F, (40, 24))
        # subsample where grids coincide: 40 = 5 * 8, compare against direct sum
        x = np.arange(40) * 2 * math.pi / 40
        y = np.arange(24) * 2 * math.pi / 24
        k = np.fft.fftfreq(16, 1 / 16)
        direct = np.real(np.einsum("ab,ia,jb->ij", F.coeffs, np.exp(1j * np.outer(x, k)), np.exp(1j * np.outer(y, k))))
        assert np.max(np.abs(fine - direct)) < 1e-12

    def test_evaluate_too_small(self, rng):
        g = GridSpec(1, 32)
        F = random_band_limited(g, 10, rng)
        with pytest.raises(ValueError):
            evaluate(F, (16,))


class TestDerivatives:
    def test_cos(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        d = to_physical(partial_derivative(to_spectral(RealField(g, np.cos(4 * x1))), 0))
        assert np.max(np.abs(d.samples + 4 * np.sin(4 * x1))) < 1e-12

    def test_box_scale(self):
        g = GridSpec(1, 32, 2.0)
        (x,) = g.mesh()
        d = to_physical(partial_derivative(to_spectral(RealField(g, np.sin(3 * x / 2.0))), 0))
        assert np.max(np.abs(d.samples - 1.5 * np.cos(3 * x / 2.0))) < 1e-12

    def test_constant(self):
        g = GridSpec(2, 16)
        d = partial_derivative(to_spectral(RealField(g, np.full(g.shape, 3.0))), 1)
        assert np.max(np.abs(d.coeffs)) == 0

    def test_commute(self, rng):
        g = GridSpec(2, 32)
        F = random_band_limited(g, 10, rng)
        a = partial_derivative(partial_derivative(F, 0), 1)
        b = partial_derivative(partial_derivative(F, 1), 0)
        assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-14 * np.max(np.abs(a.coeffs))
        assert a.is_hermitian()

    def test_bad_axis(self, rng):
        with pytest.raises(ValueError):
            partial_derivative(random_band_limited(GridSpec(2, 16), 3, rng), 2)


class TestMultiplier:
    def test_identity(self, rng):
        F = random_band_limited(GridSpec(2, 16), 5, rng)
        G = apply_multiplier(F, lambda xi: np.ones(xi.shape[1:]))
        assert np.array_equal(F.coeffs, G.coeffs)

    def test_laplacian_eigen(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        G = apply_multiplier(to_spectral(RealField(g, np.cos(4 * x1))), lambda xi: np.sum(xi**2, axis=0))
        assert np.max(np.abs(to_physical(G).samples - 16 * np.cos(4 * x1))) < 1e-12

    def test_shell_mask(self):
        g = GridSpec(2, 32)
        x1, x2 = g.mesh()
        f = RealField(g, np.cos(3 * x1) + np.cos(7 * x2))
        G = apply_multiplier(to_spectral(f), lambda xi: ((np.sqrt(np.sum(xi**2, 0)) > 2) & (np.sqrt(np.sum(xi**2, 0)) <= 4)) * 1.0)
        assert np.max(np.abs(to_physical(G).samples - np.cos(3 * x1))) < 1e-12

    def test_odd_rejected(self, rng):
        F = random_band_limited(GridSpec(2, 16), 5, rng)
        with pytest.raises(ValueError):
            apply_multiplier(F, lambda xi: xi[0])
        with pytest.raises(ValueError):
            apply_multiplier(F, lambda xi: 1j * np.ones(xi.shape[1:]))

    def test_real_output(self, rng):
        F = random_band_limited(GridSpec(2, 32), 9, rng)
        G = apply_multiplier(F, lambda xi: np.exp(-np.sum(xi**2, 0) / 10))
        full = np.fft.ifftn(G.coeffs, norm="forward")
        assert np.max(np.abs(full.imag)) < 1e-13 * np.max(np.abs(full.real))


class TestProducts:
    def test_square_of_cos(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        f = RealField(g, np.cos(4 * x1))
        p = dealiased_product(f, f)
        P = to_spectral(p)
        assert P.coeffs[0, 0] == pytest.approx(0.5, abs=1e-15)
        assert P.coeffs[8, 0] == pytest.approx(0.25, abs=1e-15)
        assert P.coeffs[-8, 0] == pytest.approx(0.25, abs=1e-15)

    def test_zero(self, rng):
        g = GridSpec(2, 16)
        f = to_physical(random_band_limited(g, 5, rng))
        p = dealiased_product(f, RealField(g, np.zeros(g.shape)))
        assert np.all(p.samples == 0)

    def test_pairing(self, rng):
        g = GridSpec(2, 32, 1.3)
        F, G = random_band_limited(g, 12, rng), random_band_limited(g, 9, rng)
        p = dealiased_product(F, G)
        pairing = g.volume * float(np.real(np.sum(F.coeffs * np.conj(G.coeffs))))
        assert physical_integral(p) == pytest.approx(pairing, rel=1e-12)

    def test_brute_force_convolution(self, rng):
        g = GridSpec(2, 16)
        F, G = random_band_limited(g, 4, rng), random_band_limited(g, 3, rng)
        P = to_spectral(dealiased_product(F, G))
        exact = brute_product_coeffs(F.coeffs, G.coeffs)
        m = P.grid.points_per_axis
        err = 0.0
        for (a, b), v in exact.items():
            err = max(err, abs(P.coeffs[a % m, b % m] - v))
        assert err < 1e-12 * max(abs(v) for v in exact.values())
        # nothing outside the exact support
        total = sum(abs(v) ** 2 for v in exact.values())
        assert np.sum(np.abs(P.coeffs) ** 2) == pytest.approx(total, rel=1e-12)

    def test_bilinear(self, rng):
        g = GridSpec(2, 16)
        F, G, H = (random_band_limited(g, 4, rng) for _ in range(3))
        lhs = dealiased_product(F + H, G).samples
        rhs = dealiased_product(F, G).samples + dealiased_product(H, G).samples
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.max(np.abs(lhs))

    def test_padded_size(self):
        g = GridSpec(2, 64)
        pg = product_grid(g, 64)
        assert pg.points_per_axis >= 130 and pg.points_per_axis % 2 == 0
        assert padded_size(3) == 8

    def test_memory_cap(self, rng):
        g = GridSpec(3, 64)
        with pytest.raises(ResourceError):
            product_grid(g, 60, memory_cap=10**5)


class TestNorms:
    def test_l2_cos(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        assert lp_norm_physical(RealField(g, np.cos(4 * x1))) ** 2 == pytest.approx(2 * math.pi**2, rel=1e-13)

    def test_l4_cos(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        assert lp_norm_physical(RealField(g, np.cos(4 * x1)), 4) ** 4 == pytest.approx(1.5 * math.pi**2, rel=1e-13)

    def test_zero(self):
        g = GridSpec(2, 16)
        z = RealField(g, np.zeros(g.shape))
        assert lp_norm_physical(z) == 0 and lp_norm_physical(z, 4) == 0

    def test_bad_p(self):
        g = GridSpec(1, 8)
        with pytest.raises(ValueError):
            lp_norm_physical(RealField(g, np.zeros(8)), 3)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 7), st.floats(0.25, 3.0))
    def test_l4_single_mode(self, k, L):
        # ||cos(k x / L)||_4^4 = 3/8 * (2 pi L)^2 on T^2 for any k
        g = GridSpec(2, 32, L)
        x1, _ = g.mesh()
        f = RealField(g, np.cos(k * x1 / L))
        assert lp_norm_physical(f, 4) ** 4 == pytest.approx(0.375 * g.volume, rel=1e-12)
