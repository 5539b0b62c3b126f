"""Verification drivers: per-cell estimates, sweeps and their acceptance checks.

Each ``verify_*`` function evaluates one cell and returns records; each
``run_*`` function maps a ``SweepConfig`` onto cells, evaluates them (in
parallel when ``workers > 1``), reduces in sorted cell order and attaches the
acceptance checks to the report.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .. import divcurl as dc
from ..decomposition import ZERO_MODE, _exponents_from_r2, bernstein_ratio, build_sector_family
from ..functionals import BESOV_DOUBLINGS, TimeQuadrature, besov_norm, integrate_in_time
from ..nullforms import NullFormKind
from ..propagator import CauchyData, energy
from ..spectral import GridSpec
from .config import ConfigError, SweepConfig
from .data import ROLE_PHI, ROLE_PSI, cell_stream, stream, multi_shell_data, normalized, random_shell_data, sector_data
from .kernel import (
    Sampler,
    WaveModes,
    half_spectrum_radius2,
    half_spectrum_weights,
    product_sizes,
)
from .records import EstimateRecord, EstimateReport, fit_scaling_exponent, spread

#: Bounded-ratio acceptance: max / median of per-cell sup ratios.
SPREAD_LIMIT = 5.0
#: Design constant of the slice-functional estimate.
C_GES = 8.0
#: Slope window for the bilinear estimate at the largest lam.
SLOPE_WINDOW = (0.15, 0.85)
#: Relative slack of the Bernstein-Hoelder chain check.
CHAIN_SLACK = 1e-9
#: Stream word separating div-curl draws from the cell streams.
DIVCURL_WORD = 7


# ---------------------------------------------------------------- integrands


def _atol(a: WaveModes, b: WaveModes, volume: float) -> float:
    """Absolute floor for time integrals of squared bilinear quantities."""
    def amp(m):
        return 2 * float(np.sum(m.w * np.abs(m.p0) + np.abs(m.p1))) if m.size else 0.0

    return 1e-24 * volume * (amp(a) * amp(b)) ** 2 + 1e-300


def _quadrature(omega: float, nodes_per_panel: int) -> TimeQuadrature:
    return TimeQuadrature.for_frequency(omega, nodes_per_panel)


@dataclass(frozen=True)
class PairResult:
    """Space-time norms of bilinear forms of one data pair."""

    l2: dict[str, float]
    besov: dict[str, float]


def bilinear_norms(
    phi: CauchyData,
    psi: CauchyData,
    kinds: Sequence[str],
    *,
    inverse: bool = False,
    besov_s: float | None = None,
    rtol: float = 1e-9,
    nodes_per_panel: int = 16,
) -> PairResult:
    """``||F(phi, psi)||_{L^2([0,1] x T^n)}`` for each null form in ``kinds``.

    ``inverse`` applies ``(-Laplace)^{-1/2}`` to the form first.  When
    ``besov_s`` is given, the ``L^2_t B^s_{2,1}`` norms are returned as well.
    All norms are computed from the same time samples.
    """
    g = phi.grid
    if psi.grid != g:
        raise ValueError("phi and psi live on different grids")
    n = g.dim
    ks = [NullFormKind.parse(k) for k in kinds]
    for k in ks:
        k.check_dim(n)
        if inverse and (k.is_q0 or k.alpha == 0):
            raise ValueError(f"(-Laplace)^(-1/2) variant needs a spatial form, got {k.tag}")
    a, b = WaveModes.from_data(phi), WaveModes.from_data(psi)
    vol = g.volume
    if a.size == 0 or b.size == 0:
        zero = {k.tag: 0.0 for k in ks}
        return PairResult(zero, dict(zero) if besov_s is not None else {})
    sizes = product_sizes(a.axis_bands(), b.axis_bands())
    sa, sb = Sampler(a, sizes), Sampler(b, sizes)
    alphas = sorted({al for k in ks for al in k.derivatives(n)})
    weights = half_spectrum_weights(sizes)
    spectral = inverse or besov_s is not None
    if spectral:
        r2 = half_spectrum_radius2(sizes)
        inv = np.divide(g.box_scale**2, r2, out=np.zeros_like(r2), where=r2 > 0)
        shells = _exponents_from_r2(r2, g.box_scale)
        live = shells != ZERO_MODE
        uniq, where = np.unique(shells[live], return_inverse=True)
        lams = np.ldexp(1.0, uniq.astype(int))

    def sample(t):
        da_c = a.derivatives(t, alphas)
        db_c = b.derivatives(t, alphas)
        da = {al: sa.sample(da_c[al]) for al in alphas}
        db = {al: sb.sample(db_c[al]) for al in alphas}
        out = []
        for k in ks:
            q = k.combine(da, db, n)
            if not spectral:
                out.append(vol * float(np.mean(q * q)))
                continue
            c2 = np.abs(sfft.rfftn(q, norm="forward")) ** 2 * weights
            m = c2 * inv if inverse else c2
            out.append(vol * float(np.sum(m)))
            if besov_s is not None:
                tot = np.zeros(len(uniq))
                np.add.at(tot, where, m[live])
                out.append(math.fsum(lams**besov_s * np.sqrt(vol * tot)) ** 2)
        return out

    omega = 2 * (a.max_frequency + b.max_frequency)
    quad = _quadrature(omega, nodes_per_panel)
    atol = _atol(a, b, vol) * (g.box_scale**2 if inverse else 1.0)
    vals = integrate_in_time(sample, quad, rtol, atol, BESOV_DOUBLINGS if besov_s is not None else 0)
    step = 2 if besov_s is not None else 1
    l2 = {k.tag: math.sqrt(max(vals[i * step], 0.0)) for i, k in enumerate(ks)}
    bes = {k.tag: math.sqrt(max(vals[i * step + 1], 0.0)) for i, k in enumerate(ks)} if besov_s is not None else {}
    return PairResult(l2, bes)


def l4_spacetime_norm(data: CauchyData, rtol: float = 1e-9, nodes_per_panel: int = 16) -> float:
    """``||u||_{L^4([0,1] x T^n)}`` of the free wave with data ``data``."""
    m = WaveModes.from_data(data)
    if m.size == 0:
        return 0.0
    b = m.axis_bands()
    sizes = product_sizes(b, b)  # > 4 * band, so the mean of u^4 is exact
    s = Sampler(m, sizes)
    vol = data.grid.volume

    def g(t):
        u, _ = m.state(t)
        x = s.sample(u)
        x2 = x * x
        return [vol * float(np.mean(x2 * x2))]

    quad = _quadrature(4 * m.max_frequency, nodes_per_panel)
    amp = 2 * float(np.sum(np.abs(m.p0) + np.abs(m.p1) / np.maximum(m.w, 1e-300)))
    val = integrate_in_time(g, quad, rtol, 1e-24 * vol * amp**4 + 1e-300)[0]
    return max(val, 0.0) ** 0.25


# ---------------------------------------------------------------- cell data


def cell_data(grid: GridSpec, mu: float, lam: float, seed: int) -> tuple[CauchyData, CauchyData]:
    """Unit-energy ``phi_mu`` and ``psi_lam`` for a ``(mu, lam, seed)`` cell."""
    phi = random_shell_data(grid, mu, cell_stream(seed, mu, lam, ROLE_PHI))
    psi = random_shell_data(grid, lam, cell_stream(seed, mu, lam, ROLE_PSI))
    return phi, psi


def _record(grid: GridSpec, tag: str, mu, lam, seed, lhs, rhs) -> EstimateRecord:
    return EstimateRecord(grid.dim, grid.points_per_axis, grid.box_scale, tag, mu, lam, seed, lhs, rhs)


def wbes_records(
    phi: CauchyData, psi: CauchyData, mu: float, lam: float, seed: int, kinds: Sequence[str],
    rtol: float = 1e-9, nodes_per_panel: int = 16,
) -> list[EstimateRecord]:
    """Bilinear estimate records: ``||Q(phi, psi)||`` against ``mu^((n-1)/2) E^(1/2) E^(1/2)``."""
    if mu > lam:
        raise ValueError(f"need mu <= lam, got mu={mu}, lam={lam}")
    g = phi.grid
    res = bilinear_norms(phi, psi, kinds, rtol=rtol, nodes_per_panel=nodes_per_panel)
    rhs = mu ** ((g.dim - 1) / 2) * math.sqrt(energy(phi) * energy(psi))
    return [_record(g, t, mu, lam, seed, res.l2[t], rhs) for t in _tags(kinds)]


def _tags(kinds: Sequence[str]) -> list[str]:
    return [NullFormKind.parse(k).tag for k in kinds]


def verify_wbes_pair(grid: GridSpec, mu: float, lam: float, seed: int, kind: str = "Q0", **kw) -> EstimateRecord:
    phi, psi = cell_data(grid, mu, lam, seed)
    return wbes_records(phi, psi, mu, lam, seed, [kind], **kw)[0]


def dwbes_records(
    phi: CauchyData, psi: CauchyData, mu: float, lam: float, seed: int, kinds: Sequence[str],
    rtol: float = 1e-9, nodes_per_panel: int = 16,
) -> list[EstimateRecord]:
    """``||(-Laplace)^(-1/2) Q_ij(phi, psi)||`` against ``mu^((n-3)/2) E^(1/2) E^(1/2)``."""
    g = phi.grid
    if g.dim < 3:
        raise ValueError("the inverse-gradient estimate needs n >= 3")
    if mu > lam:
        raise ValueError(f"need mu <= lam, got mu={mu}, lam={lam}")
    res = bilinear_norms(phi, psi, kinds, inverse=True, rtol=rtol, nodes_per_panel=nodes_per_panel)
    rhs = mu ** ((g.dim - 3) / 2) * math.sqrt(energy(phi) * energy(psi))
    return [_record(g, t, mu, lam, seed, res.l2[t], rhs) for t in _tags(kinds)]


def verify_dwbes_pair(grid: GridSpec, mu: float, lam: float, seed: int, i: int = 1, j: int = 2, **kw) -> EstimateRecord:
    if i == j:
        raise ValueError("need i != j")
    phi, psi = cell_data(grid, mu, lam, seed)
    return dwbes_records(phi, psi, mu, lam, seed, [f"Q{min(i, j)}{max(i, j)}"], **kw)[0]


def chain_bound(phi: CauchyData, psi: CauchyData, lam: float, **kw) -> float:
    """``lam ||phi||_{L^4} ||psi||_{L^4}`` over ``[0, 1] x T^n``."""
    return lam * l4_spacetime_norm(phi, **kw) * l4_spacetime_norm(psi, **kw)


# ---------------------------------------------------------------- slice estimate


@dataclass(frozen=True)
class GesResult:
    lhs: float
    rhs: float
    ok: bool
    identity_residual: float


def ges_terms(u: CauchyData, v: CauchyData, axis: int = 0, rtol: float = 1e-9, nodes_per_panel: int = 16) -> GesResult:
    """Slice-functional estimate for the free waves with data ``u`` and ``v``.

    lhs = int_0^1 int 1/4 E1(u)E2(v) + 1/4 E1(v)E2(u) + 1/8 D+(u)D-(v) + 1/8 D-(u)D+(v) dx_1 dt
    rhs = E(u) E(v) + E(u) ||Laplace_y v||^2_{L^2([0,1] x T^n)}
    """
    g = u.grid
    n = g.dim
    if n < 2:
        raise ValueError("slice functionals need n >= 2")
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} out of range")
    eu, ev = energy(u), energy(v)
    a, b = WaveModes.from_data(u), WaveModes.from_data(v)
    if a.size == 0 or b.size == 0:
        return GesResult(0.0, eu * ev, True, 0.0)
    sizes = product_sizes(a.axis_bands(), b.axis_bands())
    sa, sb = Sampler(a, sizes), Sampler(b, sizes)
    others = tuple(i for i in range(n) if i != axis)
    vol_y = (2 * math.pi * g.box_scale) ** (n - 1)
    length = 2 * math.pi * g.box_scale
    alphas = list(range(n + 1))
    worst = [0.0]
    ky = b.k[:, list(others)].astype(np.float64) / g.box_scale
    lap_y = np.sum(ky**2, axis=1)
    mult = np.where(b.k[:, -1] > 0, 2.0, 1.0)

    def slices(m, s, t):
        d = m.derivatives(t, alphas)
        ut = s.sample(d[0])
        ux = s.sample(d[axis + 1])
        gy = sum(s.sample(d[i + 1]) ** 2 for i in others)
        yint = lambda x: vol_y * np.mean(x, axis=others)
        E1 = yint(0.5 * (ut * ut + ux * ux + gy))
        E2 = yint(gy)
        Dp = yint((ut + ux) ** 2)
        Dm = yint((ut - ux) ** 2)
        P = yint(ut * ux)
        scale = max(float(np.max(np.abs(E1))), 1e-300)
        r = max(float(np.max(np.abs(4 * E1 - Dp - Dm - 2 * E2))), float(np.max(np.abs(4 * P - Dp + Dm)))) / (4 * scale)
        worst[0] = max(worst[0], r)
        return E1, E2, Dp, Dm

    def integrand(t):
        E1u, E2u, Dpu, Dmu = slices(a, sa, t)
        E1v, E2v, Dpv, Dmv = slices(b, sb, t)
        dens = 0.25 * E1u * E2v + 0.25 * E1v * E2u + 0.125 * Dpu * Dmv + 0.125 * Dmu * Dpv
        vh, _ = b.state(t)
        lap = g.volume * float(np.sum(mult * lap_y**2 * np.abs(vh) ** 2))
        return [length * float(np.mean(dens)), lap]

    omega = 2 * (a.max_frequency + b.max_frequency)
    quad = _quadrature(omega, nodes_per_panel)
    lhs, lap = integrate_in_time(integrand, quad, rtol, 1e-24 * (eu * ev + eu * ev * b.max_frequency**4) + 1e-300)
    rhs = eu * ev + eu * lap
    lhs = max(lhs, 0.0)
    return GesResult(float(lhs), float(rhs), bool(lhs <= C_GES * rhs), worst[0])


def verify_ges(u: CauchyData, v: CauchyData, axis: int = 0, **kw) -> tuple[float, float, bool]:
    r = ges_terms(u, v, axis, **kw)
    return r.lhs, r.rhs, r.ok


# ---------------------------------------------------------------- sector estimate


@dataclass(frozen=True)
class SectorResult:
    record: EstimateRecord
    bernstein: float
    sector_count: int


def verify_sector_estimate(
    grid: GridSpec, mu: float, lam: float, seed: int, oversample: int = 4, rtol: float = 1e-9,
    nodes_per_panel: int = 16,
) -> SectorResult:
    """``||Q0(phi_{mu,e1}, psi_lam)||`` against ``mu^((n-1)/4) E^(1/2) E^(1/2)``.

    ``phi_mu`` is projected onto the sector centred on ``e_1`` and rescaled to
    unit energy; the Bernstein ratio of its position field is reported too.
    """
    if mu > lam:
        raise ValueError(f"need mu <= lam, got mu={mu}, lam={lam}")
    fam = build_sector_family(mu, grid.dim)
    sec = fam.sectors[0]  # centre e_1 in both layouts
    if not np.any(sec.mask(grid)):
        raise ValueError(f"the e_1 sector of the mu={mu} shell holds no lattice points on {grid}")
    phi, psi = cell_data(grid, mu, lam, seed)
    phi_s = normalized(sector_data(phi, sec))
    res = bilinear_norms(phi_s, psi, ["Q0"], rtol=rtol, nodes_per_panel=nodes_per_panel)
    rhs = mu ** ((grid.dim - 1) / 4) * math.sqrt(energy(phi_s) * energy(psi))
    rec = _record(grid, "Q0", mu, lam, seed, res.l2["Q0"], rhs)
    return SectorResult(rec, bernstein_ratio(phi_s.phi0_hat, mu, oversample), fam.count)


# ---------------------------------------------------------------- Strichartz


def verify_strichartz_l4(grid: GridSpec, lam: float, seed: int, data: CauchyData | None = None, **kw) -> EstimateRecord:
    """``||u||_{L^4([0,1] x T^n)}`` against ``lam^((n-3)/4 - 1/2) E^(1/2)``."""
    if grid.dim not in (2, 3):
        raise ValueError("Strichartz exponents are set for n = 2, 3")
    if data is None:
        data = random_shell_data(grid, lam, cell_stream(seed, lam, lam, ROLE_PHI))
    lhs = l4_spacetime_norm(data, **kw)
    rhs = lam ** ((grid.dim - 3) / 4 - 0.5) * math.sqrt(energy(data))
    return _record(grid, "L4", lam, lam, seed, lhs, rhs)


# ---------------------------------------------------------------- corollaries


def besov_data_norm(data: CauchyData, s0: float, s1: float) -> float:
    """``||phi0||_{B^s0_{2,1}} + ||phi1||_{B^s1_{2,1}}``."""
    return besov_norm(data.phi0_hat, s0) + besov_norm(data.phi1_hat, s1)


def _inverse_variant(n: int, kinds: Sequence[str]) -> bool:
    """n = 3 with purely spatial forms: the ``(-Laplace)^(-1/2) Q_ij`` corollary."""
    return n == 3 and all(NullFormKind.parse(k).alpha not in (None, 0) for k in kinds)


def corollary_records(grid: GridSpec, shells: Sequence[float], seed: int, kinds: Sequence[str], **kw):
    """Besov-loss records for multi-shell data; returns ``(records, l2 lhs per kind)``."""
    n = grid.dim
    phi = multi_shell_data(grid, shells, seed, ROLE_PHI)
    psi = multi_shell_data(grid, shells, seed, ROLE_PSI)
    mu, lam = min(shells), max(shells)
    if _inverse_variant(n, kinds):
        # inverse-gradient variant with B^1 x B^0 data
        res = bilinear_norms(phi, psi, kinds, inverse=True, **kw)
        rhs = besov_data_norm(phi, 1.0, 0.0) * besov_data_norm(psi, 1.0, 0.0)
        lhs = res.l2
    else:
        s = (n - 1) / 2
        res = bilinear_norms(phi, psi, kinds, besov_s=s, **kw)
        rhs = besov_data_norm(phi, (n + 1) / 2, s) * besov_data_norm(psi, (n + 1) / 2, s)
        lhs = res.besov
    recs = [_record(grid, t, mu, lam, seed, lhs[t], rhs) for t in _tags(kinds)]
    return recs, res.l2


def degenerate_residual(grid: GridSpec, shell: float, seed: int, kinds: Sequence[str], **kw) -> float:
    """Relative gap between the single-shell corollary ``L^2`` lhs and the theorem record."""
    _, l2 = corollary_records(grid, [shell], seed, kinds, **kw)
    phi, psi = cell_data(grid, shell, shell, seed)
    recs = (dwbes_records if _inverse_variant(grid.dim, kinds) else wbes_records)(phi, psi, shell, shell, seed, kinds, **kw)
    worst = 0.0
    for r in recs:
        v = l2[NullFormKind.parse(r.nullform).tag]
        worst = max(worst, abs(v - r.lhs) / max(abs(r.lhs), 1e-300))
    return worst


# ---------------------------------------------------------------- execution


def parallel_map(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """``[fn(t) for t in tasks]``, in order, on up to ``workers`` processes."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
        return list(ex.map(fn, tasks, chunksize=1))


def _kw(cfg: SweepConfig) -> dict:
    return dict(rtol=cfg.rtol, nodes_per_panel=cfg.nodes_per_panel)


def _wbes_task(args):
    cfg, mu, lam, seed = args
    phi, psi = cell_data(cfg.grid_spec, mu, lam, seed)
    return wbes_records(phi, psi, mu, lam, seed, cfg.nullforms, **_kw(cfg))


def _dwbes_task(args):
    cfg, mu, lam, seed = args
    phi, psi = cell_data(cfg.grid_spec, mu, lam, seed)
    recs = dwbes_records(phi, psi, mu, lam, seed, cfg.nullforms, **_kw(cfg))
    chain = None
    if lam / mu <= cfg.chain_ratio:
        chain = chain_bound(phi, psi, lam, **_kw(cfg))
    return recs, chain


def _ges_task(args):
    cfg, mu, lam, seed = args
    u, v = cell_data(cfg.grid_spec, mu, lam, seed)
    r = ges_terms(u, v, 0, **_kw(cfg))
    rec = _record(cfg.grid_spec, "GES", mu, lam, seed, r.lhs, r.rhs)
    return rec, r.identity_residual


def _sector_task(args):
    cfg, mu, lam, seed = args
    return verify_sector_estimate(cfg.grid_spec, mu, lam, seed, cfg.oversample, **_kw(cfg))


def _strichartz_task(args):
    cfg, lam, seed = args
    return verify_strichartz_l4(cfg.grid_spec, lam, seed, **_kw(cfg))


def _corollary_task(args):
    cfg, seed = args
    recs, _ = corollary_records(cfg.grid_spec, cfg.shells, seed, cfg.nullforms, **_kw(cfg))
    return recs


def _divcurl_task(args):
    seed, i, T, X = args
    rng = stream(seed, DIVCURL_WORD, i)
    sys = dc.random_system(rng, T=T, X=X)
    rep = dc.bound_report(sys)
    return dict(
        draw=i,
        identity=dc.identity_residual(sys),
        lhs=rep.lhs,
        rhs=rep.rhs,
        ok=rep.ok,
        terms_ok=all(rep.term_ok),
        det=dc.check_det_identity(sys) / max(sys.amplitude**2, 1e-300),
        nodes=sys.t_rule.panels * sys.t_rule.m * sys.x_rule.panels * sys.x_rule.m,
    )


def _cell_tasks(cfg: SweepConfig):
    return [(cfg, mu, lam, seed) for mu, lam in cfg.cells() for seed in cfg.seeds]


def _spread_checks(records, kinds) -> dict:
    out = {}
    for k in kinds:
        s = spread(records, k if k in ("GES", "L4") else NullFormKind.parse(k).tag)
        out[f"spread_{k}"] = dict(value=s, limit=SPREAD_LIMIT, ok=bool(s <= SPREAD_LIMIT))
    return out


def _finite_check(records) -> dict:
    ok = all(math.isfinite(r.ratio) and r.ratio >= 0 for r in records)
    return {"finite": dict(ok=ok)}


def run_wbes(cfg: SweepConfig) -> EstimateReport:
    cfg.validate()
    recs = [r for batch in parallel_map(_wbes_task, _cell_tasks(cfg), cfg.workers) for r in batch]
    checks = _finite_check(recs)
    checks.update(_spread_checks(recs, cfg.nullforms))
    lam = max(lam for _, lam in cfg.cells())
    for k in cfg.nullforms:
        try:
            slope, res = fit_scaling_exponent(recs, lam=lam, kind=NullFormKind.parse(k).tag)
            ok = SLOPE_WINDOW[0] <= slope <= SLOPE_WINDOW[1]
        except ValueError as e:
            slope, res, ok = None, None, False
            checks[f"slope_{k}"] = dict(value=None, error=str(e), lam=lam, window=list(SLOPE_WINDOW), ok=ok)
            continue
        checks[f"slope_{k}"] = dict(value=slope, residual=res, lam=lam, window=list(SLOPE_WINDOW), ok=ok)
    return EstimateReport("wbes", recs, cfg.to_dict(), checks)


def run_dwbes(cfg: SweepConfig) -> EstimateReport:
    cfg.validate()
    if cfg.dim < 3:
        raise ConfigError("dwbes needs dim = 3")
    out = parallel_map(_dwbes_task, _cell_tasks(cfg), cfg.workers)
    recs = [r for batch, _ in out for r in batch]
    checks = _finite_check(recs)
    checks.update(_spread_checks(recs, cfg.nullforms))
    worst, tested = 0.0, 0
    ok = True
    for batch, chain in out:
        if chain is None:
            continue
        for r in batch:
            tested += 1
            worst = max(worst, r.lhs / chain if chain > 0 else 0.0)
            ok &= r.lhs <= chain * (1 + CHAIN_SLACK)
    checks["chain"] = dict(worst_lhs_over_bound=worst, cells=tested, ok=bool(ok and tested > 0))
    return EstimateReport("dwbes", recs, cfg.to_dict(), checks)


def run_ges(cfg: SweepConfig) -> EstimateReport:
    cfg.validate()
    out = parallel_map(_ges_task, _cell_tasks(cfg), cfg.workers)
    recs = [r for r, _ in out]
    worst_id = max(e for _, e in out)
    worst = max(r.ratio for r in recs)
    checks = _finite_check(recs)
    checks["bound"] = dict(worst_ratio=worst, constant=C_GES, ok=bool(worst <= C_GES))
    checks["slice_identities"] = dict(worst_residual=worst_id, ok=bool(worst_id <= 1e-12))
    return EstimateReport("ges", recs, cfg.to_dict(), checks)


def run_sector(cfg: SweepConfig) -> EstimateReport:
    cfg.validate()
    out = parallel_map(_sector_task, _cell_tasks(cfg), cfg.workers)
    recs = [o.record for o in out]
    checks = _finite_check(recs)
    target = (cfg.dim - 1) / 4
    lam = max(lam for _, lam in cfg.cells())
    try:
        slope, res = fit_scaling_exponent(recs, lam=lam)
        ok = slope <= target + 0.2
    except ValueError:
        slope, res, ok = None, None, False
    checks["lhs_slope"] = dict(value=slope, residual=res, limit=target + 0.2, ok=bool(ok))
    bern: dict[float, float] = {}
    for o in out:
        if o.record.lam == lam:
            bern[o.record.mu] = max(bern.get(o.record.mu, 0.0), o.bernstein)
    mus = sorted(bern)
    if len(mus) >= 3:
        x, y = np.log(mus), np.log([bern[m] for m in mus])
        bslope = float(np.polyfit(x, y, 1)[0])
        bok = bslope <= target + 0.15
    else:
        bslope, bok = None, False
    checks["bernstein_slope"] = dict(value=bslope, sup_by_mu={repr(m): bern[m] for m in mus},
                                     limit=target + 0.15, ok=bool(bok))
    return EstimateReport("sector", recs, cfg.to_dict(), checks)


def run_strichartz(cfg: SweepConfig) -> EstimateReport:
    cfg.validate()
    tasks = [(cfg, lam, seed) for lam in sorted(set(cfg.lam_list)) for seed in cfg.seeds]
    recs = parallel_map(_strichartz_task, tasks, cfg.workers)
    checks = _finite_check(recs)
    checks.update(_spread_checks(recs, ["L4"]))
    return EstimateReport("strichartz", recs, cfg.to_dict(), checks)


def run_corollary(cfg: SweepConfig) -> EstimateReport:
    cfg.validate()
    if len(cfg.shells) < 3:
        raise ConfigError("corollary sweeps need data on >= 3 shells")
    recs = [r for b in parallel_map(_corollary_task, [(cfg, s) for s in cfg.seeds], cfg.workers) for r in b]
    checks = _finite_check(recs)
    # one (mu, lam) cell per kind, so the spread is taken over the per-seed ratios
    for k in cfg.nullforms:
        ratios = [r.ratio for r in recs if r.nullform == NullFormKind.parse(k).tag]
        med = float(np.median(ratios))
        s = max(ratios) / med if med > 0 else math.inf
        checks[f"spread_{k}"] = dict(value=s, over="seeds", limit=SPREAD_LIMIT, ok=bool(s <= SPREAD_LIMIT))
    shell = sorted(cfg.shells)[len(cfg.shells) // 2]
    deg = degenerate_residual(cfg.grid_spec, shell, cfg.seeds[0], cfg.nullforms, **_kw(cfg))
    checks["degenerate"] = dict(shell=shell, residual=deg, ok=bool(deg <= 1e-10))
    return EstimateReport("corollary", recs, cfg.to_dict(), checks)


def run_divcurl(cfg: SweepConfig) -> EstimateReport:
    tasks = [(cfg.seeds[0], i, cfg.T, cfg.X) for i in range(cfg.draws)]
    out = parallel_map(_divcurl_task, tasks, cfg.workers)
    recs = [EstimateRecord(1, o["nodes"], 1.0, "DC", 0.0, 0.0, o["draw"], o["lhs"], o["rhs"]) for o in out]
    ident = max(o["identity"] for o in out)
    det = max(o["det"] for o in out)
    checks = dict(
        identity=dict(worst=ident, limit=dc.IDENTITY_RTOL, ok=bool(ident <= dc.IDENTITY_RTOL)),
        bound=dict(worst_ratio=max(r.ratio for r in recs), constant=dc.C_DC, ok=all(o["ok"] for o in out)),
        term_bounds=dict(ok=all(o["terms_ok"] for o in out)),
        det=dict(worst=det, limit=1e-13, ok=bool(det <= 1e-13)),
    )
    return EstimateReport("divcurl", recs, cfg.to_dict(), checks)


DRIVERS = dict(
    divcurl=run_divcurl,
    wbes=run_wbes,
    dwbes=run_dwbes,
    ges=run_ges,
    sector=run_sector,
    strichartz=run_strichartz,
    corollary=run_corollary,
)
