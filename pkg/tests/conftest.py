import numpy as np
import pytest

from wavebilinear.spectral import GridSpec, SpectralField


def random_band_limited(grid: GridSpec, band: int, rng: np.random.Generator, zero_mean: bool = True) -> SpectralField:
    """Random real field with all modes |k_axis| <= band."""
    k = grid.wavenumbers()
    mask = np.all(np.abs(k) <= band, axis=0)
    c = np.where(mask, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape), 0)
    # Hermitian part of the coefficients gives a real field
    ref = np.roll(np.flip(c, axis=tuple(range(grid.dim))), 1, axis=tuple(range(grid.dim)))
    c = 0.5 * (c + np.conj(ref))
    if zero_mean:
        c[(0,) * grid.dim] = 0
    return SpectralField(grid, c)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


#: One entry per acceptance criterion: number -> (passed, detail).
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
