"""Reproducible Cauchy data: random dyadic-shell data, plane waves, multi-shell sums.

Random streams come from counter-based Philox generators.  Each stream is
keyed by a tuple of integers (seed, cell and role identifiers) hashed through
``numpy.random.SeedSequence``, so a cell's data never depends on which other
cells run, in which order, or on which worker.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from ..decomposition import DyadicShell, sector_project
from ..propagator import CauchyData, energy
from ..spectral import GridSpec, SpectralField

#: Stream roles.
ROLE_PHI = 0
ROLE_PSI = 1


def _scale_key(x: float) -> int:
    """Integer key of a dyadic scale (its base-2 exponent, offset to stay non-negative)."""
    return int(round(math.log2(x))) + 1024


def stream(seed: int, *words: int) -> np.random.Generator:
    """Philox generator keyed by ``seed`` and further non-negative integer words."""
    key = np.random.SeedSequence([int(seed), *(int(w) for w in words)]).generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def cell_stream(seed: int, mu: float, lam: float, role: int) -> np.random.Generator:
    """Stream for one ``(mu, lam, seed)`` cell and role (``ROLE_PHI`` / ``ROLE_PSI``).

    Scales enter through their base-2 exponents.
    """
    return stream(int(seed), _scale_key(mu), _scale_key(lam), int(role))


def _shell_points(grid: GridSpec, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Flat FFT-order indices of the shell and of their negatives."""
    mask = DyadicShell(lam).mask(grid)
    if lam * grid.box_scale >= grid.points_per_axis / 2:
        raise ValueError(f"shell lam={lam} does not fit on {grid} (need lam*L < N/2)")
    flat = np.flatnonzero(mask.ravel())
    if flat.size == 0:
        raise ValueError(f"shell lam={lam} has no lattice points on {grid}")
    n = grid.points_per_axis
    idx = np.stack(np.unravel_index(flat, grid.shape))
    neg = np.ravel_multi_index(tuple((-idx) % n), grid.shape)
    return flat, neg


def _hermitian_phases(grid: GridSpec, flat: np.ndarray, neg: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus coefficients on the shell with ``c(-k) = conj(c(k))``."""
    canon = flat < neg
    th = rng.uniform(0.0, 2 * math.pi, int(canon.sum()))
    c = np.zeros(grid.shape, dtype=np.complex128).ravel()
    z = np.exp(1j * th)
    c[flat[canon]] = z
    c[neg[canon]] = np.conj(z)
    return c.reshape(grid.shape)


def random_shell_data(
    grid: GridSpec,
    lam: float,
    rng: np.random.Generator,
    unit_energy: bool = True,
) -> CauchyData:
    """Random data in the shell ``lam/2 < |xi| <= lam``.

    Every shell coefficient of ``phi0`` has modulus one and every coefficient
    of ``phi1`` modulus ``lam``, each with an independent uniform phase.
    """
    flat, neg = _shell_points(grid, lam)
    p0 = _hermitian_phases(grid, flat, neg, rng)
    p1 = lam * _hermitian_phases(grid, flat, neg, rng)
    data = CauchyData(SpectralField(grid, p0), SpectralField(grid, p1))
    return normalized(data) if unit_energy else data


def normalized(data: CauchyData) -> CauchyData:
    """Rescale to unit energy; zero data is rejected."""
    e = energy(data)
    if e == 0:
        raise ValueError("cannot normalise zero data")
    return data.scaled(1.0 / math.sqrt(e))


def plane_wave_data(grid: GridSpec, xi: Sequence[int], direction: int = +1, amplitude: float = 1.0) -> CauchyData:
    """Data of ``amplitude * cos(xi.x/L - direction |xi| t / L)`` for lattice vector ``xi``."""
    xi = tuple(int(v) for v in xi)
    if len(xi) != grid.dim or not any(xi):
        raise ValueError(f"need a nonzero lattice vector of length {grid.dim}")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if max(abs(v) for v in xi) >= grid.points_per_axis // 2:
        raise ValueError(f"lattice vector {xi} does not fit on {grid}")
    n = grid.points_per_axis
    w = math.sqrt(sum(v * v for v in xi)) / grid.box_scale
    p0 = np.zeros(grid.shape, dtype=np.complex128)
    p1 = np.zeros(grid.shape, dtype=np.complex128)
    pos = tuple(v % n for v in xi)
    neg = tuple((-v) % n for v in xi)
    p0[pos] += 0.5 * amplitude
    p0[neg] += 0.5 * amplitude
    # u_t(0) = direction * w * sin(xi.x/L)
    p1[pos] += direction * amplitude * w / 2j
    p1[neg] -= direction * amplitude * w / 2j
    return CauchyData(SpectralField(grid, p0), SpectralField(grid, p1))


def multi_shell_data(grid: GridSpec, shells: Iterable[float], seed: int, role: int) -> CauchyData:
    """Sum of unit-energy random pieces, one per shell.

    The piece at shell ``s`` is drawn from the ``(s, s, seed)`` cell stream,
    so single-shell data coincide with the diagonal theorem cell.
    """
    total = None
    for s in sorted(set(float(v) for v in shells)):
        piece = random_shell_data(grid, s, cell_stream(seed, s, s, role))
        total = piece if total is None else total + piece
    if total is None:
        raise ValueError("need at least one shell")
    return total


def sector_data(data: CauchyData, sector) -> CauchyData:
    """Restrict shell data to one angular sector (both components)."""
    return CauchyData(sector_project(data.phi0_hat, sector), sector_project(data.phi1_hat, sector))
