import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavebilinear.decomposition import DyadicShell, lp_project
from wavebilinear.functionals import (
    ConvergenceError,
    TimeQuadrature,
    besov_norm,
    half_spectrum_shell_sums,
    homogeneous_sobolev_norm,
    integrate_in_time,
    shell_norms,
    slice_functionals,
    spacetime_norm,
    time_l2_besov_norm,
)
from wavebilinear.propagator import CauchyData, energy, evolve
from wavebilinear.spectral import (
    GridSpec,
    RealField,
    l2_norm_spectral,
    lp_norm_physical,
    partial_derivative,
    to_physical,
)

from conftest import random_band_limited


def random_data(grid, band, rng):
    return CauchyData(random_band_limited(grid, band, rng), random_band_limited(grid, band, rng))


class TestSlices:
    def test_traveling_wave(self):
        for dim, L in ((2, 1.0), (3, 0.5)):
            g = GridSpec(dim, 16, L)
            x1 = g.mesh()[0]
            d = CauchyData.from_fields(RealField(g, np.cos(x1 / L)), RealField(g, np.sin(x1 / L) / L))
            t = 0.4
            p = slice_functionals(evolve(d, t), 0)
            vol_y = (2 * math.pi * L) ** (dim - 1)
            expect = vol_y * 4 * np.sin(p.x / L - t / L) ** 2 / L**2
            assert np.max(np.abs(p.Dminus - expect)) < 1e-12 * vol_y
            assert np.max(np.abs(p.Dplus)) < 1e-12 * vol_y
            assert np.max(np.abs(p.E2)) < 1e-12 * vol_y

    def test_identities_and_fubini(self, rng):
        g = GridSpec(2, 32, 1.2)
        d = random_data(g, 10, rng)
        for axis in (0, 1):
            p = slice_functionals(evolve(d, 0.3), axis)
            r1, r2 = p.identity_residuals()
            assert r1 <= 1e-12 and r2 <= 1e-12
            assert np.all(p.E1 >= 0) and np.all(p.Dplus >= 0) and np.all(p.Dminus >= 0) and np.all(p.E2 >= 0)
            assert np.all(np.abs(p.P) <= p.E1 * (1 + 1e-12))
            assert p.integrate(p.E1) == pytest.approx(energy(d), rel=1e-12)

    def test_y_independent(self):
        g = GridSpec(3, 16)
        x1 = g.mesh()[0]
        d = CauchyData.from_fields(RealField(g, np.cos(3 * x1)), RealField(g, np.zeros(g.shape)))
        assert np.all(slice_functionals(evolve(d, 0.2)).E2 == 0)

    def test_errors(self, rng):
        s = evolve(random_data(GridSpec(2, 16), 4, rng), 0.0)
        with pytest.raises(ValueError):
            slice_functionals(s, 2)
        with pytest.raises(ValueError):
            slice_functionals(s, 0, points=8)
        with pytest.raises(ValueError):
            slice_functionals(evolve(random_data(GridSpec(1, 16), 4, rng), 0.0))


class TestQuadrature:
    def test_budget(self):
        q = TimeQuadrature.for_frequency(100.0)
        assert q.total_nodes >= 400 / math.pi
        with pytest.raises(ValueError):
            TimeQuadrature(1, 16, 100.0)

    def test_exact_trig(self):
        q = TimeQuadrature.for_frequency(12.0)
        val = integrate_in_time(lambda t: [math.cos(12 * t) ** 2, 1.0], q)
        assert val[0] == pytest.approx(0.5 + math.sin(24) / 48, rel=1e-14)
        assert val[1] == pytest.approx(1.0, rel=1e-15)

    def test_convergence_error_reports_both(self):
        # frequency far above the declared budget
        q = TimeQuadrature(1, 4, 0.0)
        with pytest.raises(ConvergenceError) as e:
            integrate_in_time(lambda t: math.cos(200 * t), q)
        assert e.value.coarse != e.value.fine

    def test_atol_floor(self):
        q = TimeQuadrature(1, 4, 0.0)
        v = integrate_in_time(lambda t: 1e-20 * math.cos(200 * t), q, atol=1e-15)
        assert abs(v[0]) < 1e-15


class TestSpacetimeNorms:
    def test_static_cos(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        f = RealField(g, np.cos(4 * x1))
        q = TimeQuadrature.for_frequency(0.0)
        assert spacetime_norm(lambda t: f, 2, q) == pytest.approx(math.sqrt(2 * math.pi**2), rel=1e-14)
        assert spacetime_norm(lambda t: f, 4, q) == pytest.approx((1.5 * math.pi**2) ** 0.25, rel=1e-14)

    def test_zero(self):
        g = GridSpec(2, 16)
        z = RealField(g, np.zeros(g.shape))
        assert spacetime_norm(lambda t: z, 2, TimeQuadrature.for_frequency(1.0)) == 0

    def test_projection_monotone(self, rng):
        g = GridSpec(2, 32)
        d = random_data(g, 12, rng)
        P = DyadicShell(8)
        proj = CauchyData(lp_project(d.phi0_hat, P), lp_project(d.phi1_hat, P))
        q = TimeQuadrature.for_frequency(2 * math.sqrt(2) * 12)
        full = spacetime_norm(lambda t: evolve(d, t).u, 2, q)
        part = spacetime_norm(lambda t: evolve(proj, t).u, 2, q)
        assert part <= full


class TestSobolevBesov:
    def test_sobolev(self, rng):
        g = GridSpec(2, 32, 0.8)
        f = random_band_limited(g, 10, rng)
        assert homogeneous_sobolev_norm(f, 0) == pytest.approx(l2_norm_spectral(f), rel=1e-13)
        h1 = sum(l2_norm_spectral(partial_derivative(f, a)) ** 2 for a in range(2))
        assert homogeneous_sobolev_norm(f, 1) ** 2 == pytest.approx(h1, rel=1e-12)

    def test_sobolev_single_mode(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        f = RealField(g, np.cos(4 * x1))
        assert homogeneous_sobolev_norm(f, 1) == pytest.approx(4 * lp_norm_physical(f), rel=1e-13)

    def test_negative_needs_zero_mean(self):
        g = GridSpec(2, 16)
        with pytest.raises(ValueError):
            homogeneous_sobolev_norm(RealField(g, np.ones(g.shape)), -0.5)

    def test_besov_single_shell(self):
        g = GridSpec(2, 32)
        x1, x2 = g.mesh()
        f = RealField(g, np.cos(3 * x1) + np.cos(4 * x2))
        assert besov_norm(f, 1) == pytest.approx(4 * lp_norm_physical(f), rel=1e-13)

    def test_besov_two_shells(self):
        g = GridSpec(2, 32)
        x1, x2 = g.mesh()
        a, b = np.cos(3 * x1), 2 * np.cos(7 * x2)
        f = RealField(g, a + b)
        expect = 4**0.5 * lp_norm_physical(RealField(g, a)) + 8**0.5 * lp_norm_physical(RealField(g, b))
        assert besov_norm(f, 0.5) == pytest.approx(expect, rel=1e-13)

    def test_besov_dominates_l2(self, rng):
        f = random_band_limited(GridSpec(3, 16), 7, rng)
        assert besov_norm(f, 0) >= l2_norm_spectral(f)
        assert sum(v**2 for v in shell_norms(f).values()) == pytest.approx(l2_norm_spectral(f) ** 2, rel=1e-12)

    def test_besov_mean_rejected(self):
        g = GridSpec(2, 16)
        with pytest.raises(ValueError):
            besov_norm(RealField(g, np.ones(g.shape)), 1)

    def test_half_spectrum_shells(self, rng):
        g = GridSpec(2, 32, 1.5)
        f = random_band_limited(g, 12, rng)
        sums = half_spectrum_shell_sums(to_physical(f).samples, 1.5)
        ref = shell_norms(f)
        assert set(2.0**j for j in sums) == set(ref)
        for j, v in sums.items():
            assert math.sqrt(g.volume * v) == pytest.approx(ref[2.0**j], rel=1e-12)

    def test_time_besov(self, rng):
        g = GridSpec(2, 32)
        raw = random_data(g, 12, rng)
        shells = (DyadicShell(4), DyadicShell(8))

        def keep(f):
            return lp_project(f, shells[0]) + lp_project(f, shells[1])

        d = CauchyData(keep(raw.phi0_hat), keep(raw.phi1_hat))
        q = TimeQuadrature.for_frequency(2 * 8 * math.sqrt(2))
        val = time_l2_besov_norm(lambda t: evolve(d, t).u, 1.0, q)
        per = [
            sh.lam * spacetime_norm(lambda t: to_physical(lp_project(evolve(d, t).u_hat, sh)), 2, q) for sh in shells
        ]
        # Minkowski in time brackets the l1 sum over shells
        assert max(per) <= val <= sum(per) * (1 + 1e-12)
        assert time_l2_besov_norm(lambda t: RealField(g, np.zeros(g.shape)), 1.0, q) == 0

    @settings(max_examples=15, deadline=None)
    @given(st.floats(-2, 2), st.floats(0.1, 5))
    def test_besov_homogeneous(self, s, c):
        g = GridSpec(2, 16)
        f = random_band_limited(g, 6, np.random.default_rng(5))
        assert besov_norm(f * c, s) == pytest.approx(c * besov_norm(f, s), rel=1e-12)
