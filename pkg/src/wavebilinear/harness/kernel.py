"""Sparse evaluation of free waves for the sweep drivers.

Shell-localized data occupy a small fraction of the lattice, so the drivers
keep only the nonzero modes of the half spectrum (``k_last >= 0``), evolve
them in closed form and scatter derivative coefficients straight into a
zero-padded half-spectrum array of any (possibly anisotropic) size.  The
result is bitwise independent of the rest of the grid and agrees with the
generic ``evolve`` / ``evaluate`` route to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from ..propagator import CauchyData
from ..spectral import padded_size


@dataclass(frozen=True, eq=False)
class WaveModes:
    """Nonzero half-spectrum modes of Cauchy data.

    ``k`` has shape ``(m, dim)`` (signed lattice indices), ``w = |k|/L``.
    """

    dim: int
    box_scale: float
    k: np.ndarray
    w: np.ndarray
    p0: np.ndarray
    p1: np.ndarray

    @classmethod
    def from_data(cls, data: CauchyData, tol: float = 0.0) -> "WaveModes":
        g = data.grid
        c0 = data.phi0_hat.coeffs
        c1 = data.phi1_hat.coeffs
        kk = g.wavenumbers()
        top = max(float(np.max(np.abs(c0))), float(np.max(np.abs(c1))))
        live = (np.abs(c0) > tol * top) | (np.abs(c1) > tol * top)
        live &= kk[-1] >= 0
        if top == 0:
            live[...] = False
        k = kk[:, live].T.astype(np.int64)
        w = np.sqrt(np.sum(k.astype(np.float64) ** 2, axis=1)) / g.box_scale
        return cls(g.dim, g.box_scale, k, w, c0[live].copy(), c1[live].copy())

    @property
    def size(self) -> int:
        return len(self.w)

    def axis_bands(self) -> tuple[int, ...]:
        if self.size == 0:
            return (0,) * self.dim
        return tuple(int(b) for b in np.max(np.abs(self.k), axis=0))

    @property
    def max_frequency(self) -> float:
        """Largest ``|xi|`` (physical units)."""
        return float(self.w.max()) if self.size else 0.0

    def state(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Mode coefficients of ``u(t)`` and ``u_t(t)``."""
        c = np.cos(t * self.w)
        s = np.sin(t * self.w)
        sinc = np.divide(s, self.w, out=np.full_like(self.w, float(t)), where=self.w > 0)
        return c * self.p0 + sinc * self.p1, -self.w * s * self.p0 + c * self.p1

    def derivatives(self, t: float, alphas: Sequence[int]) -> dict[int, np.ndarray]:
        """Mode coefficients of ``d_alpha u(t)`` (``0`` = time, ``i`` = ``x_i``)."""
        u, ut = self.state(t)
        out = {}
        for a in alphas:
            if a == 0:
                out[a] = ut
            else:
                out[a] = (1j * self.k[:, a - 1] / self.box_scale) * u
        return out


@dataclass(frozen=True, eq=False)
class Sampler:
    """Scatter-and-transform plan for one ``WaveModes`` on grid ``sizes``."""

    modes: WaveModes
    sizes: tuple[int, ...]
    _flat: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        for s, b in zip(sizes, self.modes.axis_bands()):
            if s < 2 * b + 1:
                raise ValueError(f"grid {sizes} cannot hold a mode band of {b}")
        half = sizes[:-1] + (sizes[-1] // 2 + 1,)
        idx = tuple(self.modes.k[:, a] % sizes[a] for a in range(len(sizes) - 1)) + (self.modes.k[:, -1],)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "_flat", np.ravel_multi_index(idx, half) if self.modes.size else np.zeros(0, np.int64))
        object.__setattr__(self, "_half", half)

    def sample(self, coeffs: np.ndarray) -> np.ndarray:
        """Real samples of the trigonometric polynomial with the given mode coefficients."""
        arr = np.zeros(self._half, dtype=np.complex128)
        arr.flat[self._flat] = coeffs
        return sfft.irfftn(arr, s=self.sizes, norm="forward")


def product_sizes(*bands: Sequence[int], factor: int = 1, minimum: int = 8) -> tuple[int, ...]:
    """Per-axis even FFT sizes exact for a product of fields with the given axis bands.

    ``factor`` multiplies the summed band (2 for a squared product whose mean is taken).
    """
    total = np.sum(np.asarray(bands, dtype=np.int64), axis=0)
    return tuple(padded_size(max(minimum, factor * 2 * int(b) + 2)) for b in total)


def half_spectrum_weights(sizes: Sequence[int]) -> np.ndarray:
    """Multiplicity of each ``rfftn`` coefficient in the full spectrum."""
    m = sizes[-1]
    w = np.full(m // 2 + 1, 2.0)
    w[0] = 1.0
    if m % 2 == 0:
        w[-1] = 1.0
    return w


def half_spectrum_radius2(sizes: Sequence[int]) -> np.ndarray:
    """``|k|^2`` (lattice units) on the ``rfftn`` layout of ``sizes``."""
    r2 = None
    d = len(sizes)
    for a, m in enumerate(sizes):
        k = np.rint(sfft.fftfreq(m, 1.0 / m)) if a < d - 1 else np.arange(m // 2 + 1, dtype=np.float64)
        shape = [1] * d
        shape[a] = len(k)
        term = (k**2).reshape(shape)
        r2 = term if r2 is None else r2 + term
    return r2


def spectral_l2_squared(q: np.ndarray, volume: float, multiplier: np.ndarray | None = None) -> float:
    """``volume * sum |m_k c_k|^2`` for real samples ``q`` via ``rfftn``."""
    c = sfft.rfftn(q, norm="forward")
    a = np.abs(c) ** 2
    if multiplier is not None:
        a = a * multiplier
    return volume * float(np.sum(a * half_spectrum_weights(q.shape)))


def box_volume(dim: int, box_scale: float) -> float:
    return (2 * math.pi * box_scale) ** dim
