"""Slice functionals, space-time norms over a time interval, Sobolev and Besov norms.

With ``x = (x_1, y)`` and ``f`` a free wave, the slice functionals are the
``y``-integrals

    E1 = int e(f) dy          E2 = int |grad_y f|^2 dy
    D+- = int (f_t +- f_x1)^2 dy        P = int f_t f_x1 dy

evaluated per ``x_1`` sample.  Time integrals use a composite Gauss-Legendre
rule whose node budget is tied to the largest time frequency of the
integrand, and every result is certified by re-running with twice as many
panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .decomposition import ZERO_MODE, _exponents_from_r2, shell_exponents
from .propagator import WaveSnapshot
from .spectral import (
    RealField,
    SpectralField,
    evaluate,
    lp_norm_physical,
    padded_size,
    to_spectral,
)

#: Relative change allowed when the quadrature is refined.
REFINE_RTOL = 1e-9
#: Extra panel doublings allowed for time integrals of Besov norms.
BESOV_DOUBLINGS = 5


class ConvergenceError(RuntimeError):
    """Quadrature refinement changed a result by more than the tolerance."""

    def __init__(self, coarse, fine, rtol):
        self.coarse = coarse
        self.fine = fine
        super().__init__(f"quadrature refinement check failed (rtol {rtol:g}): coarse={coarse!r}, fine={fine!r}")


@dataclass(frozen=True)
class SliceProfile:
    """Per-``x_1`` values of the slice functionals at time ``t``."""

    t: float
    axis: int
    x: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    Dplus: np.ndarray
    Dminus: np.ndarray
    P: np.ndarray
    length: float

    def integrate(self, values: np.ndarray) -> float:
        """``int values dx_1`` over the period (exact for the sampled band)."""
        return float(self.length * np.mean(values))

    def identity_residuals(self) -> tuple[float, float]:
        """Relative residuals of ``4 E1 = D+ + D- + 2 E2`` and ``4 P = D+ - D-``."""
        scale = max(float(np.max(np.abs(self.E1))), 1e-300)
        r1 = np.max(np.abs(4 * self.E1 - self.Dplus - self.Dminus - 2 * self.E2)) / (4 * scale)
        r2 = np.max(np.abs(4 * self.P - self.Dplus + self.Dminus)) / (4 * scale)
        return float(r1), float(r2)


def slice_functionals(s: WaveSnapshot, axis: int = 0, points: int | None = None) -> SliceProfile:
    """Slice functionals of the snapshot ``s`` sliced along ``axis``.

    The integrands are sampled on an isotropic grid of ``points`` per axis
    (default: even size ``>= 4B + 2``, so products of two profiles of the same
    band still integrate exactly along ``x_1``).
    """
    g = s.grid
    n = g.dim
    if n < 2:
        raise ValueError("slice functionals need n >= 2")
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} out of range for dim {n}")
    b = s.bandwidth()
    m = padded_size(max(g.points_per_axis, 4 * b + 2)) if points is None else int(points)
    if m < 4 * b + 1:
        raise ValueError(f"{m} points cannot integrate slice products of bandwidth {b}")
    sizes = (m,) * n
    ut = evaluate(s.derivative(0), sizes)
    ux = evaluate(s.derivative(axis + 1), sizes)
    grad_y2 = np.zeros(sizes)
    for a in range(n):
        if a != axis:
            d = evaluate(s.derivative(a + 1), sizes)
            grad_y2 += d * d
    vol_y = (2 * math.pi * g.box_scale) ** (n - 1)
    others = tuple(i for i in range(n) if i != axis)

    def yint(a: np.ndarray) -> np.ndarray:
        return vol_y * np.mean(a, axis=others)

    e = 0.5 * (ut * ut + ux * ux + grad_y2)
    length = 2 * math.pi * g.box_scale
    return SliceProfile(
        t=s.t,
        axis=axis,
        x=length * np.arange(m) / m,
        E1=yint(e),
        E2=yint(grad_y2),
        Dplus=yint((ut + ux) ** 2),
        Dminus=yint((ut - ux) ** 2),
        P=yint(ut * ux),
        length=length,
    )


@lru_cache(maxsize=256)
def _gauss_rule(panels: int, nodes_per_panel: int, t0: float, t1: float) -> tuple[np.ndarray, np.ndarray]:
    s, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(t0, t1, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * s[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@dataclass(frozen=True)
class TimeQuadrature:
    """Composite Gauss-Legendre rule on ``[t0, t1]``.

    ``max_time_frequency`` is the largest angular frequency present in the
    integrand; the rule carries at least ``4 Omega / pi`` nodes per unit time.
    """

    panels: int
    nodes_per_panel: int = 16
    max_time_frequency: float = 0.0
    t0: float = 0.0
    t1: float = 1.0

    def __post_init__(self):
        if self.panels < 1 or self.nodes_per_panel < 2:
            raise ValueError("need at least one panel and two nodes per panel")
        needed = 4 * self.max_time_frequency * (self.t1 - self.t0) / math.pi
        if self.total_nodes < needed:
            raise ValueError(f"{self.total_nodes} nodes is below the budget {needed:.1f} for Omega={self.max_time_frequency}")

    @classmethod
    def for_frequency(cls, omega: float, nodes_per_panel: int = 16, t0: float = 0.0, t1: float = 1.0) -> "TimeQuadrature":
        needed = 4 * omega * (t1 - t0) / math.pi
        panels = max(1, math.ceil(needed / nodes_per_panel))
        return cls(panels, nodes_per_panel, float(omega), float(t0), float(t1))

    @property
    def total_nodes(self) -> int:
        return self.panels * self.nodes_per_panel

    def rule(self) -> tuple[np.ndarray, np.ndarray]:
        return _gauss_rule(self.panels, self.nodes_per_panel, float(self.t0), float(self.t1))

    def refined(self) -> "TimeQuadrature":
        return TimeQuadrature(2 * self.panels, self.nodes_per_panel, self.max_time_frequency, self.t0, self.t1)


def _apply_rule(g: Callable[[float], Sequence[float]], quad: TimeQuadrature) -> np.ndarray:
    nodes, weights = quad.rule()
    rows = [np.atleast_1d(np.asarray(g(float(t)), dtype=np.float64)) for t in nodes]
    vals = np.stack(rows)
    return np.array([math.fsum(weights * vals[:, i]) for i in range(vals.shape[1])])


def integrate_in_time(
    g: Callable[[float], Sequence[float] | float],
    quad: TimeQuadrature,
    rtol: float = REFINE_RTOL,
    atol: float | Sequence[float] = 0.0,
    max_doublings: int = 0,
) -> np.ndarray:
    """Integrate a (vector-valued) function of time with a refinement self-check.

    The refined value is returned.  A component passes when the two rules
    agree to ``rtol`` relatively or both lie below ``atol``.  Trigonometric
    polynomials within the node budget pass on the first doubling; integrands
    that are only smooth (square roots of shell sums) may request up to
    ``max_doublings`` further doublings before the check is declared failed.
    """
    fine = _apply_rule(g, quad)
    for _ in range(max_doublings + 1):
        coarse = fine
        quad = quad.refined()
        fine = _apply_rule(g, quad)
        atol_b = np.broadcast_to(np.asarray(atol, dtype=np.float64), fine.shape)
        diff = np.abs(fine - coarse)
        big = np.maximum(np.abs(fine), np.abs(coarse))
        ok = (diff <= rtol * big) | (big <= atol_b)
        if np.all(ok):
            return fine
    raise ConvergenceError(coarse.tolist(), fine.tolist(), rtol)


def spacetime_norms(
    fields_at: Callable[[float], Sequence[RealField]],
    p: int,
    quad: TimeQuadrature,
    rtol: float = REFINE_RTOL,
    atol: float = 0.0,
) -> list[float]:
    """``(int ||F_i(t)||_{L^p}^p dt)^{1/p}`` for several fields sharing the time samples.

    ``atol`` applies to the time integral of ``||F||_p^p``.
    """

    def g(t):
        return [lp_norm_physical(f, p) ** p for f in fields_at(t)]

    vals = integrate_in_time(g, quad, rtol, atol)
    return [max(v, 0.0) ** (1.0 / p) for v in vals]


def spacetime_norm(
    field_at: Callable[[float], RealField],
    p: int,
    quad: TimeQuadrature,
    rtol: float = REFINE_RTOL,
    atol: float = 0.0,
) -> float:
    """``||F||_{L^p([t0, t1] x T^n)}`` by certified time quadrature."""
    return spacetime_norms(lambda t: [field_at(t)], p, quad, rtol, atol)[0]


def homogeneous_sobolev_norm(f: RealField | SpectralField, s: float) -> float:
    """``((2 pi L)^n sum |k/L|^{2s} |c_k|^2)^{1/2}``."""
    fs = f if isinstance(f, SpectralField) else to_spectral(f)
    g = fs.grid
    origin = (0,) * g.dim
    c2 = np.abs(fs.coeffs) ** 2
    total = float(np.sum(c2))
    if s < 0 and c2[origin] > 1e-24 * total:
        raise ValueError("negative-order homogeneous norm of a field with nonzero mean")
    w = g.wave_speed()
    weight = np.zeros_like(w)
    live = w > 0
    weight[live] = w[live] ** (2 * s)
    if s == 0:
        weight[origin] = 1.0
    return math.sqrt(g.volume * float(np.sum(weight * c2)))


def shell_norms(f: RealField | SpectralField) -> dict[float, float]:
    """``{lam: ||P_lam f||_{L^2}}`` over all lattice shells carrying content."""
    fs = f if isinstance(f, SpectralField) else to_spectral(f)
    e = shell_exponents(fs.grid)
    c2 = np.abs(fs.coeffs) ** 2
    live = e != ZERO_MODE
    sums = _group_sums(e[live], c2[live])
    return {2.0**j: math.sqrt(fs.grid.volume * v) for j, v in sums.items()}


def _group_sums(keys: np.ndarray, vals: np.ndarray) -> dict[int, float]:
    uniq, inv = np.unique(keys, return_inverse=True)
    tot = np.zeros(len(uniq))
    np.add.at(tot, inv, vals)
    return {int(j): float(v) for j, v in zip(uniq, tot)}


def besov_norm(f: RealField | SpectralField, s: float) -> float:
    """``sum_lam lam^s ||P_lam f||_{L^2}`` (homogeneous ``B^s_{2,1}``)."""
    fs = f if isinstance(f, SpectralField) else to_spectral(f)
    if abs(fs.coeffs[(0,) * fs.grid.dim]) > 1e-12 * max(float(np.max(np.abs(fs.coeffs))), 1e-300):
        raise ValueError("homogeneous Besov norm needs zero-mean input")
    return math.fsum(lam**s * v for lam, v in sorted(shell_norms(fs).items()))


def half_spectrum_shell_sums(q: np.ndarray, box_scale: float) -> dict[int, float]:
    """Shell sums of ``|c_k|^2`` for a real array sampled on an arbitrary (possibly anisotropic) grid.

    Returns ``{j: sum over the 2^j shell}``; used where products live on
    padded grids that are not ``GridSpec``-shaped.
    """
    sizes = q.shape
    c = sfft.rfftn(q, norm="forward")
    ks = [np.rint(sfft.fftfreq(m, 1.0 / m)) for m in sizes[:-1]]
    ks.append(np.arange(sizes[-1] // 2 + 1, dtype=np.float64))
    r2 = np.zeros(c.shape)
    for a, k in enumerate(ks):
        shape = [1] * len(sizes)
        shape[a] = len(k)
        r2 = r2 + (k**2).reshape(shape)
    weight = np.full(c.shape[-1], 2.0)
    weight[0] = 1.0
    if sizes[-1] % 2 == 0:
        weight[-1] = 1.0
    c2 = np.abs(c) ** 2 * weight
    e = _exponents_from_r2(r2, box_scale)
    live = e != ZERO_MODE
    return _group_sums(e[live], c2[live])


def time_l2_besov_norm(
    field_at: Callable[[float], RealField],
    s: float,
    quad: TimeQuadrature,
    rtol: float = REFINE_RTOL,
    atol: float = 0.0,
) -> float:
    """``(int besov_norm(F(t), s)^2 dt)^{1/2}`` with the refinement self-check.

    The integrand is not a trigonometric polynomial, so up to
    ``BESOV_DOUBLINGS`` extra panel doublings are allowed.
    """
    val = integrate_in_time(lambda t: besov_norm(field_at(t), s) ** 2, quad, rtol, atol, BESOV_DOUBLINGS)[0]
    return math.sqrt(max(val, 0.0))


__all__ = [
    "ConvergenceError",
    "SliceProfile",
    "TimeQuadrature",
    "besov_norm",
    "half_spectrum_shell_sums",
    "homogeneous_sobolev_norm",
    "integrate_in_time",
    "shell_norms",
    "slice_functionals",
    "spacetime_norm",
    "spacetime_norms",
    "time_l2_besov_norm",
]
