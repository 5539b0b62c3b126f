"""Periodic grids, spectral transforms and exact products of band-limited fields.

A field on the torus ``[0, 2*pi*L)^n`` sampled on ``N^n`` points is identified
with the trigonometric polynomial

    f(x) = sum_k c_k exp(i k.x / L),    k in Z^n,  |k_axis| < N/2,

so ``k`` is the integer lattice index and ``k / L`` the physical wave vector.
Parseval carries the volume factor explicitly::

    int |f|^2 dx = (2 pi L)^n sum_k |c_k|^2

Products are formed on a zero-padded grid large enough to hold the full
product bandwidth, so every quadratic or quartic integral of a band-limited
field is exact up to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

#: Upper bound on the number of points of any padded product grid.
DEFAULT_MEMORY_CAP = 2**27

#: Coefficients below this fraction of the largest one do not count towards the bandwidth.
BAND_TOL = 1e-14


class ResourceError(RuntimeError):
    """A padded grid would exceed the configured memory cap."""


@dataclass(frozen=True)
class GridSpec:
    """Isotropic periodic grid on ``[0, 2*pi*L)^dim`` with ``N`` points per axis."""

    dim: int
    points_per_axis: int
    box_scale: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = self.points_per_axis
        if n < 8 or n % 2:
            raise ValueError(f"points_per_axis must be even and >= 8, got {n}")
        if not (self.box_scale > 0 and math.isfinite(self.box_scale)):
            raise ValueError(f"box_scale must be positive, got {self.box_scale}")
        object.__setattr__(self, "box_scale", float(self.box_scale))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def volume(self) -> float:
        return (2 * math.pi * self.box_scale) ** self.dim

    @property
    def max_mode(self) -> int:
        """Largest representable lattice index per axis."""
        return self.points_per_axis // 2 - 1

    def wavenumbers(self) -> np.ndarray:
        """Integer lattice indices, shape ``(dim, N, ..., N)``, FFT ordering."""
        return _wavenumbers(self.dim, self.points_per_axis)

    def wavevectors(self) -> np.ndarray:
        """Physical wave vectors ``k / L``, shape ``(dim, N, ..., N)``."""
        return _wavevectors(self.dim, self.points_per_axis, self.box_scale)

    def radius_squared(self) -> np.ndarray:
        """Integer ``|k|^2`` on the lattice."""
        return _radius_squared(self.dim, self.points_per_axis)

    def wave_speed(self) -> np.ndarray:
        """Physical ``|k| / L`` on the lattice."""
        return _wave_speed(self.dim, self.points_per_axis, self.box_scale)

    def coordinates(self) -> list[np.ndarray]:
        x = 2 * math.pi * self.box_scale * np.arange(self.points_per_axis) / self.points_per_axis
        return [x] * self.dim

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.coordinates(), indexing="ij")

    def with_points(self, points_per_axis: int) -> "GridSpec":
        return GridSpec(self.dim, points_per_axis, self.box_scale)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@lru_cache(maxsize=32)
def _wavenumbers(dim: int, n: int) -> np.ndarray:
    k1 = np.rint(sfft.fftfreq(n, 1.0 / n)).astype(np.int64)
    return _readonly(np.stack(np.meshgrid(*([k1] * dim), indexing="ij")))


@lru_cache(maxsize=32)
def _wavevectors(dim: int, n: int, box_scale: float) -> np.ndarray:
    return _readonly(_wavenumbers(dim, n) / box_scale)


@lru_cache(maxsize=32)
def _radius_squared(dim: int, n: int) -> np.ndarray:
    k = _wavenumbers(dim, n)
    return _readonly(np.sum(k * k, axis=0))


@lru_cache(maxsize=32)
def _wave_speed(dim: int, n: int, box_scale: float) -> np.ndarray:
    return _readonly(np.sqrt(_radius_squared(dim, n)) / box_scale)


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples of a periodic field on ``grid``."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.samples, dtype=np.float64).view()
        if a.shape != self.grid.shape:
            raise ValueError(f"samples shape {a.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("field samples must be finite")
        a.flags.writeable = False
        object.__setattr__(self, "samples", a)

    def __add__(self, other: "RealField") -> "RealField":
        _same_grid(self.grid, other.grid)
        return RealField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "RealField") -> "RealField":
        _same_grid(self.grid, other.grid)
        return RealField(self.grid, self.samples - other.samples)

    def __mul__(self, s: float) -> "RealField":
        return RealField(self.grid, self.samples * float(s))

    __rmul__ = __mul__

    def __neg__(self) -> "RealField":
        return RealField(self.grid, -self.samples)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Lattice coefficients ``c_k`` of a real field, full array in FFT ordering."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).view()
        if c.shape != self.grid.shape:
            raise ValueError(f"coeffs shape {c.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        scale = np.max(np.abs(c)) if c.size else 0.0
        nyq = self.grid.points_per_axis // 2
        for axis in range(self.grid.dim):
            plane = np.take(c, nyq, axis=axis)
            if scale > 0 and np.max(np.abs(plane)) > 1e-12 * scale:
                raise ValueError("coefficients violate the band limit (Nyquist content)")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "_band", None)

    def bandwidth(self) -> int:
        """Largest ``|k_axis|`` carrying a non-negligible coefficient (0 for constants)."""
        if self._band is None:
            object.__setattr__(self, "_band", _bandwidth(self.grid, self.coeffs))
        return self._band

    def is_hermitian(self, rtol: float = 1e-13) -> bool:
        c = self.coeffs
        flipped = np.conj(_reflect(c))
        scale = np.max(np.abs(c))
        return bool(scale == 0 or np.max(np.abs(c - flipped)) <= rtol * scale)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, s: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * float(s))

    __rmul__ = __mul__


def _same_grid(a: GridSpec, b: GridSpec) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def _reflect(c: np.ndarray) -> np.ndarray:
    """Array ``c[-k]`` in FFT ordering."""
    out = np.flip(c, axis=tuple(range(c.ndim)))
    return np.roll(out, 1, axis=tuple(range(c.ndim)))


def _bandwidth(grid: GridSpec, c: np.ndarray) -> int:
    mag = np.abs(c)
    top = mag.max() if mag.size else 0.0
    if top == 0:
        return 0
    live = mag > BAND_TOL * top
    k = grid.wavenumbers()
    return int(max(np.abs(k[a][live]).max() for a in range(grid.dim)))


def padded_size(min_points: int) -> int:
    """Smallest even FFT-friendly size ``>= min_points`` (and ``>= 8``)."""
    m = max(8, int(min_points))
    while True:
        m = sfft.next_fast_len(m, real=True)
        if m % 2 == 0:
            return m
        m += 1


def product_grid(grid: GridSpec, total_band: int, memory_cap: int = DEFAULT_MEMORY_CAP) -> GridSpec:
    """Grid holding a product of total bandwidth ``total_band`` without aliasing."""
    m = padded_size(max(grid.points_per_axis, 2 * total_band + 2))
    if m**grid.dim > memory_cap:
        raise ResourceError(
            f"padded grid {m}^{grid.dim} exceeds memory cap of {memory_cap} points"
        )
    return grid.with_points(m)


def to_spectral(f: RealField) -> SpectralField:
    """Forward transform. Nyquist-plane content is discarded (it is not band-limited)."""
    c = sfft.fftn(f.samples, norm="forward")
    nyq = f.grid.points_per_axis // 2
    for axis in range(f.grid.dim):
        idx = [slice(None)] * f.grid.dim
        idx[axis] = nyq
        c[tuple(idx)] = 0
    return SpectralField(f.grid, c)


def to_physical(f: SpectralField) -> RealField:
    return RealField(f.grid, evaluate(f, f.grid.shape))


def evaluate(f: SpectralField, sizes: Sequence[int], band: int | None = None) -> np.ndarray:
    """Sample the trigonometric polynomial ``f`` on a uniform grid of ``sizes`` points.

    ``sizes`` may exceed ``f.grid.shape`` (zero padding) and may differ per axis.
    Each size must be at least ``2*band + 1`` so no retained mode aliases.
    """
    sizes = tuple(int(s) for s in sizes)
    n = f.grid.points_per_axis
    b = f.bandwidth() if band is None else band
    if any(s < 2 * b + 1 for s in sizes):
        raise ValueError(f"grid {sizes} too small for bandwidth {b}")
    if sizes == f.grid.shape:
        half = f.coeffs[..., : n // 2 + 1]
        return sfft.irfftn(half, s=sizes, norm="forward")
    src = [np.r_[0 : b + 1, n - b : n] if b else np.array([0]) for _ in sizes[:-1]]
    dst = [np.r_[0 : b + 1, m - b : m] if b else np.array([0]) for m in sizes[:-1]]
    src.append(np.arange(b + 1))
    dst.append(np.arange(b + 1))
    half_shape = sizes[:-1] + (sizes[-1] // 2 + 1,)
    work = np.zeros(half_shape, dtype=np.complex128)
    work[np.ix_(*dst)] = f.coeffs[np.ix_(*src)]
    return sfft.irfftn(work, s=sizes, norm="forward")


def partial_derivative(f: SpectralField, axis: int) -> SpectralField:
    """Spectral derivative along ``axis`` (0-based): multiply by ``i k_axis / L``."""
    if not 0 <= axis < f.grid.dim:
        raise ValueError(f"axis {axis} out of range for dim {f.grid.dim}")
    return SpectralField(f.grid, f.coeffs * (1j * f.grid.wavevectors()[axis]))


def apply_multiplier(f: SpectralField, symbol: Callable[[np.ndarray], np.ndarray]) -> SpectralField:
    """Apply a real, even Fourier multiplier.

    ``symbol`` receives the physical wave vectors as an array of shape
    ``(dim, N, ..., N)`` and returns real values broadcastable to the grid.
    Odd or complex symbols are rejected since they would break realness.
    """
    xi = f.grid.wavevectors()
    m = np.broadcast_to(np.asarray(symbol(xi)), f.grid.shape)
    m_ref = np.broadcast_to(np.asarray(symbol(-xi)), f.grid.shape)
    if np.iscomplexobj(m) and np.max(np.abs(np.imag(m))) > 0:
        raise ValueError("multiplier symbol must be real-valued")
    m = np.real(m)
    scale = max(np.max(np.abs(m)), 1e-300)
    if np.max(np.abs(m - np.real(m_ref))) > 1e-12 * scale:
        raise ValueError("multiplier symbol must be even: m(-xi) == m(xi)")
    return SpectralField(f.grid, f.coeffs * m)


def dealiased_product(
    f: RealField | SpectralField,
    g: RealField | SpectralField,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> RealField:
    """Exact pointwise product of two band-limited fields.

    The result lives on a padded grid (same box) of even size
    ``>= 2*(B_f + B_g) + 2`` so that it is represented without aliasing and
    its own L^2 norm is exact.
    """
    fs = f if isinstance(f, SpectralField) else to_spectral(f)
    gs = g if isinstance(g, SpectralField) else to_spectral(g)
    _same_grid(fs.grid, gs.grid)
    out = product_grid(fs.grid, fs.bandwidth() + gs.bandwidth(), memory_cap)
    a = evaluate(fs, out.shape)
    b = evaluate(gs, out.shape)
    return RealField(out, a * b)


def physical_integral(f: RealField) -> float:
    """``int f dx`` (exact for a band-limited field)."""
    return float(f.grid.volume * np.mean(f.samples))


def lp_norm_physical(f: RealField, p: int = 2) -> float:
    """Exact ``L^p`` norm (p in {2, 4}) of a band-limited field."""
    if p == 2:
        return math.sqrt(f.grid.volume * float(np.mean(f.samples**2)))
    if p == 4:
        sq = dealiased_product(f, f)
        return math.sqrt(lp_norm_physical(sq, 2))
    raise ValueError(f"p must be 2 or 4, got {p}")


def l2_norm_spectral(f: SpectralField) -> float:
    """``L^2`` norm through Parseval."""
    return math.sqrt(f.grid.volume * float(np.sum(np.abs(f.coeffs) ** 2)))


def mean_value(f: SpectralField) -> complex:
    return complex(f.coeffs[(0,) * f.grid.dim])
