"""Exact free-wave evolution by Fourier multipliers, and the wave energy.

For zero-mean Cauchy data ``(phi0, phi1)`` the solution of
``u_tt - Laplace u = 0`` is, mode by mode,

    u(t)   = cos(t|k|/L) phi0 + (L/|k|) sin(t|k|/L) phi1
    u_t(t) = -(|k|/L) sin(t|k|/L) phi0 + cos(t|k|/L) phi1

The time derivative comes from the formula, never from differencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    GridSpec,
    RealField,
    SpectralField,
    partial_derivative,
    product_grid,
    evaluate,
    to_physical,
    to_spectral,
)

#: Relative size of a mean mode that is treated as roundoff and zeroed.
MEAN_TOL = 1e-12


def _zero_mean(f: SpectralField, name: str) -> SpectralField:
    c = f.coeffs
    origin = (0,) * f.grid.dim
    top = np.max(np.abs(c))
    if top == 0 or c[origin] == 0:
        return f
    if abs(c[origin]) > MEAN_TOL * top:
        raise ValueError(f"{name} must have zero spatial mean (mean coefficient {c[origin]:.3e})")
    c = c.copy()
    c[origin] = 0
    return SpectralField(f.grid, c)


@dataclass(frozen=True, eq=False)
class CauchyData:
    """Initial position ``phi0`` and velocity ``phi1``, stored spectrally."""

    phi0_hat: SpectralField
    phi1_hat: SpectralField

    def __post_init__(self):
        if self.phi0_hat.grid != self.phi1_hat.grid:
            raise ValueError("phi0 and phi1 must share a grid")
        object.__setattr__(self, "phi0_hat", _zero_mean(self.phi0_hat, "phi0"))
        object.__setattr__(self, "phi1_hat", _zero_mean(self.phi1_hat, "phi1"))

    @classmethod
    def from_fields(cls, phi0: RealField, phi1: RealField) -> "CauchyData":
        return cls(to_spectral(phi0), to_spectral(phi1))

    @property
    def grid(self) -> GridSpec:
        return self.phi0_hat.grid

    @property
    def phi0(self) -> RealField:
        return to_physical(self.phi0_hat)

    @property
    def phi1(self) -> RealField:
        return to_physical(self.phi1_hat)

    def scaled(self, s: float) -> "CauchyData":
        return CauchyData(self.phi0_hat * s, self.phi1_hat * s)

    def __add__(self, other: "CauchyData") -> "CauchyData":
        return CauchyData(self.phi0_hat + other.phi0_hat, self.phi1_hat + other.phi1_hat)

    def bandwidth(self) -> int:
        return max(self.phi0_hat.bandwidth(), self.phi1_hat.bandwidth())


@dataclass(frozen=True, eq=False)
class WaveSnapshot:
    """State ``(u(t), u_t(t))`` of a free wave at time ``t``."""

    t: float
    u_hat: SpectralField
    ut_hat: SpectralField

    def __post_init__(self):
        if self.u_hat.grid != self.ut_hat.grid:
            raise ValueError("u and u_t must share a grid")

    @property
    def grid(self) -> GridSpec:
        return self.u_hat.grid

    @property
    def u(self) -> RealField:
        return to_physical(self.u_hat)

    @property
    def ut(self) -> RealField:
        return to_physical(self.ut_hat)

    def as_data(self) -> CauchyData:
        """Reuse the snapshot as new Cauchy data at time zero."""
        return CauchyData(self.u_hat, self.ut_hat)

    def derivative(self, alpha: int) -> SpectralField:
        """Space-time derivative: ``alpha = 0`` is d/dt, ``alpha = i >= 1`` is d/dx_i."""
        if alpha == 0:
            return self.ut_hat
        if 1 <= alpha <= self.grid.dim:
            return partial_derivative(self.u_hat, alpha - 1)
        raise ValueError(f"derivative index {alpha} out of range 0..{self.grid.dim}")

    def bandwidth(self) -> int:
        return max(self.u_hat.bandwidth(), self.ut_hat.bandwidth())


def propagator_symbols(grid: GridSpec, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``cos(t w)``, ``sin(t w)/w`` and ``w sin(t w)`` with ``w = |k|/L`` (finite at k=0)."""
    w = grid.wave_speed()
    c = np.cos(t * w)
    s = np.sin(t * w)
    sinc = np.divide(s, w, out=np.full_like(w, float(t)), where=w > 0)
    return c, sinc, w * s


def evolve(data: CauchyData, t: float) -> WaveSnapshot:
    """Exact solution at time ``t``; negative ``t`` runs the wave backwards."""
    t = float(t)
    c, sinc, ws = propagator_symbols(data.grid, t)
    p0 = data.phi0_hat.coeffs
    p1 = data.phi1_hat.coeffs
    u = SpectralField(data.grid, c * p0 + sinc * p1)
    ut = SpectralField(data.grid, -ws * p0 + c * p1)
    return WaveSnapshot(t, u, ut)


def energy(state: CauchyData | WaveSnapshot) -> float:
    """``E = 1/2 (2 pi L)^n sum(|phi1|^2 + |k/L|^2 |phi0|^2)``."""
    if isinstance(state, WaveSnapshot):
        state = state.as_data()
    g = state.grid
    w2 = g.wave_speed() ** 2
    total = np.sum(np.abs(state.phi1_hat.coeffs) ** 2) + np.sum(w2 * np.abs(state.phi0_hat.coeffs) ** 2)
    return 0.5 * g.volume * float(total)


def energy_density(s: WaveSnapshot) -> RealField:
    """Pointwise ``1/2 (u_t^2 + |grad u|^2)`` on the exact product grid."""
    out = product_grid(s.grid, 2 * s.bandwidth())
    acc = np.zeros(out.shape)
    for alpha in range(s.grid.dim + 1):
        d = evaluate(s.derivative(alpha), out.shape)
        acc += d * d
    return RealField(out, 0.5 * acc)


def box_residual(s: WaveSnapshot, data: CauchyData) -> float:
    """``L^2`` norm of ``(d_t^2 - Laplace) u`` evaluated spectrally at time ``s.t``.

    ``u_tt`` is taken from the second time derivative of the exact multiplier
    formula, ``-w^2 cos(tw) phi0 - w sin(tw) phi1``, and compared against the
    spectral Laplacian of ``u``.
    """
    g = s.grid
    w = g.wave_speed()
    c, _, ws = propagator_symbols(g, s.t)
    utt = -(w**2) * c * data.phi0_hat.coeffs - ws * data.phi1_hat.coeffs
    lap = -(w**2) * s.u_hat.coeffs
    return math.sqrt(g.volume * float(np.sum(np.abs(utt - lap) ** 2)))
