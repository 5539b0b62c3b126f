"""Dyadic Littlewood-Paley shells and angular sectors on the frequency lattice.

Cutoffs are sharp characteristic functions, so shells partition the nonzero
lattice and the sectors of a family partition each shell exactly.  A sector
is an antipodal pair of caps around ``+omega`` and ``-omega``; lattice points
are assigned to the nearest center on the projective sphere (largest
``|xi_hat . omega|``), ties going to the lowest center index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .spectral import GridSpec, RealField, SpectralField, evaluate, to_spectral

#: Support-condition constant: sum_{j,k} |w_k xi_j - w_j xi_k| <= C_SEC mu^{-1/2} |xi|.
C_SEC = 2.0
#: Sector count constant: |family| <= C_COUNT mu^{(n-1)/2}.
C_COUNT = 4.0

_TIE_TOL = 1e-12


def _is_dyadic(lam: float) -> bool:
    if lam <= 0:
        return False
    m, _ = math.frexp(lam)
    return m == 0.5


def shell_exponents(grid: GridSpec) -> np.ndarray:
    """Integer ``j`` with ``2^(j-1) < |k|/L <= 2^j`` per lattice point (``k = 0`` gets a sentinel)."""
    return _shell_exponents(grid.dim, grid.points_per_axis, grid.box_scale)


_EXP_CACHE: dict = {}
ZERO_MODE = np.iinfo(np.int64).min


def _exponents_from_r2(r2: np.ndarray, box_scale: float) -> np.ndarray:
    r2 = np.asarray(r2, dtype=np.float64)
    out = np.full(r2.shape, ZERO_MODE, dtype=np.int64)
    live = r2 > 0
    if not np.any(live):
        return out
    j = np.ceil(0.5 * np.log2(r2[live] / box_scale**2)).astype(np.int64)
    # exact threshold comparison removes log2 rounding
    for _ in range(2):
        upper = (np.ldexp(1.0, j) * box_scale) ** 2
        lower = (np.ldexp(1.0, j - 1) * box_scale) ** 2
        j = np.where(r2[live] > upper, j + 1, j)
        j = np.where(r2[live] <= lower, j - 1, j)
    out[live] = j
    return out


def _shell_exponents(dim: int, n: int, box_scale: float) -> np.ndarray:
    key = (dim, n, box_scale)
    if key not in _EXP_CACHE:
        grid = GridSpec(dim, n, box_scale)
        a = _exponents_from_r2(grid.radius_squared(), box_scale)
        a.flags.writeable = False
        if len(_EXP_CACHE) > 16:
            _EXP_CACHE.clear()
        _EXP_CACHE[key] = a
    return _EXP_CACHE[key]


@dataclass(frozen=True)
class DyadicShell:
    """Frequency shell ``lam/2 < |xi| <= lam`` (physical units), ``lam`` a power of two."""

    lam: float

    def __post_init__(self):
        if not _is_dyadic(float(self.lam)):
            raise ValueError(f"shell scale must be a power of two, got {self.lam}")
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def exponent(self) -> int:
        return int(round(math.log2(self.lam)))

    def mask(self, grid: GridSpec) -> np.ndarray:
        return shell_exponents(grid) == self.exponent

    def is_representable(self, grid: GridSpec) -> bool:
        return bool(np.any(self.mask(grid)))


def dyadic_shells(grid: GridSpec) -> list[DyadicShell]:
    """All shells with at least one lattice point on ``grid``, ascending."""
    e = shell_exponents(grid)
    js = np.unique(e[e != ZERO_MODE])
    return [DyadicShell(2.0 ** int(j)) for j in js]


def lp_project(f: SpectralField, shell: DyadicShell) -> SpectralField:
    """Sharp Littlewood-Paley projection onto ``shell``."""
    return SpectralField(f.grid, np.where(shell.mask(f.grid), f.coeffs, 0))


@dataclass(frozen=True, eq=False)
class SectorFamily:
    """Antipodal angular sectors partitioning the ``mu``-shell."""

    mu: float
    dim: int
    centers: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        c = c / np.linalg.norm(c, axis=1, keepdims=True)
        c.flags.writeable = False
        object.__setattr__(self, "centers", c)
        pts = np.concatenate([c, -c])
        object.__setattr__(self, "_tree", cKDTree(pts))

    @property
    def count(self) -> int:
        return len(self.centers)

    @property
    def sectors(self) -> list["AngularSector"]:
        return [AngularSector(self, i) for i in range(self.count)]

    def assign_directions(self, directions: np.ndarray) -> np.ndarray:
        """Nearest-center index for unit vectors of shape ``(m, dim)``."""
        m = len(directions)
        if m == 0:
            return np.zeros(0, dtype=np.int64)
        k = min(6, 2 * self.count)
        _, idx = self._tree.query(directions, k=k)
        idx = np.atleast_2d(idx).reshape(m, k)
        cand = idx % self.count
        scores = np.abs(np.einsum("mkd,md->mk", self.centers[cand], directions))
        best = scores.max(axis=1, keepdims=True)
        # lowest center index among (near-)ties
        tied = scores >= best - _TIE_TOL
        masked = np.where(tied, cand, np.iinfo(np.int64).max)
        return masked.min(axis=1)

    def assignment(self, grid: GridSpec) -> np.ndarray:
        """Sector index per lattice point of the ``mu``-shell; ``-1`` elsewhere."""
        key = grid
        if key not in self._cache:
            shell = DyadicShell(self.mu).mask(grid)
            out = np.full(grid.shape, -1, dtype=np.int64)
            k = grid.wavenumbers()[:, shell].T.astype(np.float64)
            dirs = k / np.linalg.norm(k, axis=1, keepdims=True)
            out[shell] = self.assign_directions(dirs)
            out.flags.writeable = False
            self._cache[key] = out
        return self._cache[key]


@dataclass(frozen=True, eq=False)
class AngularSector:
    """One sector of a family: in-shell lattice points nearest to ``+-center``."""

    family: SectorFamily
    index: int

    @property
    def mu(self) -> float:
        return self.family.mu

    @property
    def center(self) -> np.ndarray:
        return self.family.centers[self.index]

    def mask(self, grid: GridSpec) -> np.ndarray:
        return self.family.assignment(grid) == self.index


def _circle_centers(mu: float) -> np.ndarray:
    count = math.ceil(0.5 * math.pi * math.sqrt(mu))
    theta = np.arange(count) * (math.pi / count)
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def _zonal_cell_radius(theta_a: float, theta_b: float, dphi: float) -> float:
    """Angular distance from the center of a zonal cell to its farthest (corner) point."""
    tc = 0.5 * (theta_a + theta_b)
    worst = 0.0
    for th in (theta_a, theta_b):
        cosd = math.cos(th) * math.cos(tc) + math.sin(th) * math.sin(tc) * math.cos(0.5 * dphi)
        worst = max(worst, math.acos(min(1.0, cosd)))
    return worst


def _sphere_centers(mu: float, radius: float) -> np.ndarray:
    """Zonal layout on the hemisphere ``x_1 >= 0`` with covering radius ``<= radius``.

    Polar cap around ``e_1`` plus colatitude bands split into equal-longitude
    cells; every point of the projective sphere lies within ``radius`` of the
    center of the cell containing it, hence of its nearest center.
    """
    best = None
    for frac in np.linspace(0.45, 0.85, 41):
        h = frac * radius
        nb = math.ceil((0.5 * math.pi - radius) / (2 * h))
        edges = np.linspace(radius, 0.5 * math.pi, nb + 1)
        rings = []
        for a, b in zip(edges[:-1], edges[1:]):
            m = 1
            while _zonal_cell_radius(a, b, 2 * math.pi / m) > radius:
                m += 1
            rings.append((a, b, m))
        total = 1 + sum(r[2] for r in rings)
        if best is None or total < best[0]:
            best = (total, rings)
    pts = [np.array([1.0, 0.0, 0.0])]
    for i, (a, b, m) in enumerate(best[1]):
        tc = 0.5 * (a + b)
        phase = 0.5 * (i % 2)
        phi = (np.arange(m) + phase) * (2 * math.pi / m)
        pts.extend(
            np.stack([np.full(m, math.cos(tc)), math.sin(tc) * np.cos(phi), math.sin(tc) * np.sin(phi)], axis=1)
        )
    return np.array(pts)


def build_sector_family(mu: float, n: int) -> SectorFamily:
    """Sector family for the ``mu``-shell in dimension ``n`` (2 or 3).

    n = 2: ``ceil(pi/2 sqrt(mu))`` arc pairs with centers ``i pi / K``
    (half-width ``pi/(2K) <= mu^{-1/2}``).  n = 3: zonal caps with covering
    radius ``arcsin(mu^{-1/2} / sqrt 3)``, which keeps the support-condition
    ratio at most ``C_SEC`` for every center orientation.
    """
    mu = float(mu)
    if not _is_dyadic(mu):
        raise ValueError(f"mu must be a power of two, got {mu}")
    if mu < 4:
        raise ValueError(f"mu = {mu} is too small for sectors of width mu^(-1/2) (need mu >= 4)")
    if n == 2:
        return SectorFamily(mu, 2, _circle_centers(mu))
    if n == 3:
        radius = math.asin(1.0 / math.sqrt(3.0 * mu))
        return SectorFamily(mu, 3, _sphere_centers(mu, radius))
    raise ValueError(f"sector families exist for n in (2, 3), got {n}")


def _shell_scale(f: SpectralField) -> float:
    return float(np.max(np.abs(f.coeffs)))


def sector_project(f_mu: SpectralField, s: AngularSector) -> SpectralField:
    """Restrict shell-localized data to sector ``s``."""
    shell = DyadicShell(s.mu).mask(f_mu.grid)
    top = _shell_scale(f_mu)
    if top > 0 and np.max(np.abs(np.where(shell, 0, f_mu.coeffs))) > 1e-12 * top:
        raise ValueError(f"input is not localized in the mu={s.mu} shell")
    return SpectralField(f_mu.grid, np.where(s.mask(f_mu.grid), f_mu.coeffs, 0))


def support_ratios(center: np.ndarray, k: np.ndarray, mu: float) -> np.ndarray:
    """``sum_{j,k} |w_k xi_j - w_j xi_k| / (mu^{-1/2} |xi|)`` for rows of ``k``."""
    k = np.asarray(k, dtype=np.float64)
    w = np.asarray(center, dtype=np.float64)
    cross = k[:, :, None] * w[None, None, :] - k[:, None, :] * w[None, :, None]
    num = np.abs(cross).sum(axis=(1, 2))
    return num / (mu**-0.5 * np.linalg.norm(k, axis=1))


def check_support_condition(s: AngularSector, mu: float, grid: GridSpec) -> float:
    """Largest support-condition ratio over the in-shell lattice points of ``s``."""
    k = grid.wavenumbers()[:, s.mask(grid)].T
    if len(k) == 0:
        return 0.0
    return float(support_ratios(s.center, k, mu).max())


def bernstein_ratio(g: RealField | SpectralField, mu: float, oversample: int = 4) -> float:
    """``max_{x_1} ||g(x_1, .)||_{L^inf_y} / ||g(x_1, .)||_{L^2_y}``.

    The sup in ``y`` is taken on a grid refined ``oversample`` times along the
    transverse axes; the ``L^2_y`` norm is exact.  Slices whose norm is below
    ``1e-12`` of the largest are skipped.
    """
    gs = g if isinstance(g, SpectralField) else to_spectral(g)
    grid = gs.grid
    if grid.dim < 2:
        raise ValueError("Bernstein ratio needs at least one transverse axis")
    n = grid.points_per_axis
    sizes = (n,) + (oversample * n,) * (grid.dim - 1)
    vals = evaluate(gs, sizes).reshape(n, -1)
    vol_y = (2 * math.pi * grid.box_scale) ** (grid.dim - 1)
    l2 = np.sqrt(vol_y * np.mean(vals**2, axis=1))
    linf = np.max(np.abs(vals), axis=1)
    live = l2 > 1e-12 * l2.max() if l2.max() > 0 else np.zeros(n, bool)
    if not np.any(live):
        return 0.0
    return float(np.max(linf[live] / l2[live]))


def check_anisotropic_bound(g: SpectralField, mu: float) -> float:
    """``||Laplace_y g||_{L^2} / ||grad g||_{L^2}`` for data concentrated along ``e_1``."""
    xi = g.grid.wavevectors()
    c2 = np.abs(g.coeffs) ** 2
    perp2 = np.sum(xi[1:] ** 2, axis=0)
    full2 = perp2 + xi[0] ** 2
    den = float(np.sum(full2 * c2))
    if den == 0:
        raise ValueError("anisotropic bound undefined for a zero (or constant) field")
    return math.sqrt(float(np.sum(perp2**2 * c2)) / den)
