import math

import numpy as np
import pytest

from wavebilinear.propagator import (
    CauchyData,
    box_residual,
    energy,
    energy_density,
    evolve,
)
from wavebilinear.spectral import GridSpec, RealField, physical_integral

from conftest import random_band_limited


def data_from(grid, f0, f1):
    return CauchyData.from_fields(RealField(grid, f0), RealField(grid, f1))


def random_data(grid, band, rng):
    return CauchyData(random_band_limited(grid, band, rng), random_band_limited(grid, band, rng))


class TestEvolve:
    def test_traveling_wave(self):
        g = GridSpec(2, 16)
        x1, _ = g.mesh()
        d = data_from(g, np.cos(x1), np.sin(x1))
        for t in (0.3, 1.7, -2.2):
            s = evolve(d, t)
            assert np.max(np.abs(s.u.samples - np.cos(x1 - t))) < 1e-14
            assert np.max(np.abs(s.ut.samples - np.sin(x1 - t))) < 1e-14

    def test_standing_wave(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        d = data_from(g, np.cos(4 * x1), np.zeros(g.shape))
        t = 0.37
        s = evolve(d, t)
        assert np.max(np.abs(s.u.samples - np.cos(4 * x1) * np.cos(4 * t))) < 1e-14
        assert np.max(np.abs(s.ut.samples + 4 * np.cos(4 * x1) * np.sin(4 * t))) < 1e-13

    def test_box_scale_speed(self):
        g = GridSpec(1, 32, 2.0)
        (x,) = g.mesh()
        d = data_from(g, np.cos(3 * x / 2), np.zeros(g.shape))
        s = evolve(d, 0.8)
        assert np.max(np.abs(s.u.samples - np.cos(3 * x / 2) * np.cos(1.2))) < 1e-14

    def test_t_zero_identity(self, rng):
        d = random_data(GridSpec(2, 32), 10, rng)
        s = evolve(d, 0.0)
        assert np.array_equal(s.u_hat.coeffs, d.phi0_hat.coeffs)
        assert np.array_equal(s.ut_hat.coeffs, d.phi1_hat.coeffs)

    def test_mean_rejected(self):
        g = GridSpec(1, 8)
        with pytest.raises(ValueError):
            data_from(g, np.ones(8), np.zeros(8))

    def test_mismatched_grids(self, rng):
        with pytest.raises(ValueError):
            CauchyData(random_band_limited(GridSpec(2, 16), 3, rng), random_band_limited(GridSpec(2, 32), 3, rng))

    def test_semigroup(self, rng):
        d = random_data(GridSpec(2, 32, 0.7), 12, rng)
        a = evolve(d, 0.9)
        b = evolve(evolve(d, 0.4).as_data(), 0.5)
        scale = np.max(np.abs(a.u_hat.coeffs))
        assert np.max(np.abs(a.u_hat.coeffs - b.u_hat.coeffs)) < 1e-12 * scale
        assert np.max(np.abs(a.ut_hat.coeffs - b.ut_hat.coeffs)) < 1e-12 * np.max(np.abs(a.ut_hat.coeffs))

    def test_time_reversal(self, rng):
        d = random_data(GridSpec(2, 32), 9, rng)
        rev = CauchyData(d.phi0_hat, d.phi1_hat * -1.0)
        a = evolve(rev, 0.6)
        b = evolve(d, -0.6)
        assert np.max(np.abs(a.u_hat.coeffs - b.u_hat.coeffs)) < 1e-14
        assert np.max(np.abs(a.ut_hat.coeffs + b.ut_hat.coeffs)) < 1e-13

    def test_box_residual(self, rng):
        d = random_data(GridSpec(3, 16), 6, rng)
        norm = math.sqrt(energy(d))
        for t in (0.0, 0.5, 3.0):
            assert box_residual(evolve(d, t), d) <= 1e-11 * norm


class TestEnergy:
    def test_standing_wave_energy(self):
        g = GridSpec(2, 32)
        x1, _ = g.mesh()
        d = data_from(g, np.cos(4 * x1), np.zeros(g.shape))
        assert energy(d) == pytest.approx(16 * math.pi**2, rel=1e-14)

    def test_zero(self):
        g = GridSpec(2, 16)
        z = np.zeros(g.shape)
        assert energy(data_from(g, z, z)) == 0.0
        assert np.all(energy_density(evolve(data_from(g, z, z), 0.3)).samples == 0)

    def test_conservation(self, rng):
        d = random_data(GridSpec(2, 32, 1.3), 14, rng)
        e0 = energy(d)
        for t in np.linspace(0, 1, 10):
            assert energy(evolve(d, t)) == pytest.approx(e0, rel=1e-12)
        for t in (0.25, 0.5, 1.0):
            assert energy(evolve(d, t).as_data()) == pytest.approx(e0, rel=1e-12)

    def test_density_traveling(self):
        g = GridSpec(2, 16)
        x1, _ = g.mesh()
        t = 0.7
        e = energy_density(evolve(data_from(g, np.cos(x1), np.sin(x1)), t))
        px1, _ = e.grid.mesh()
        assert np.max(np.abs(e.samples - np.sin(px1 - t) ** 2)) < 1e-14

    def test_density_integral(self, rng):
        d = random_data(GridSpec(3, 16, 0.8), 6, rng)
        s = evolve(d, 0.42)
        e = energy_density(s)
        assert np.min(e.samples) >= 0
        assert physical_integral(e) == pytest.approx(energy(s), rel=1e-12)
