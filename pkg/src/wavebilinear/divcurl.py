"""A one-dimensional div-curl pairing bound on ``[0, T] x [-X, X]``.

Given fields with

    d_t f11 + d_x f12 = G1,        d_t f21 - d_x f22 = G2,

the pairing ``int int f11 f22 + f12 f21`` splits as ``A1 + A2 + A3`` with
``F(x) = int_{-X}^x``:

    A1 = int f21 F(f11) dx |_{t=0}  -  int f21 F(f11) dx |_{t=T}
    A2 = int int f21 F(G1)
    A3 = int int G2 F(f11)

and is bounded by ``(|f11(0)|_1 + sup_t |f11|_1 + |G1|_1) (|f21(0)|_1 + sup_t |f21|_1 + |G2|_1)``.

Fields come from generators: callables ``g(t, x)`` on broadcast arrays.  A
generator exposing ``dt`` and ``dx`` methods is differentiated analytically;
any other callable falls back to fourth-order central differences whose error
estimate is recorded on the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .functionals import ConvergenceError

#: Constant in the pairing bound and the three per-term bounds.
C_DC = 1.05
#: Relative agreement required between the pairing and ``A1 + A2 + A3``.
IDENTITY_RTOL = 1e-8
#: Relative change allowed when the quadrature is refined.
PAIRING_RTOL = 1e-10
SUPPORT_TOL = 1e-12


# ---------------------------------------------------------------- generators


@dataclass(frozen=True)
class GaussianWave:
    """``sum_k a_k exp(-((x - c_k)/w_k)^2) cos(omega_k t + theta_k)``."""

    a: tuple[float, ...]
    c: tuple[float, ...]
    w: tuple[float, ...]
    omega: tuple[float, ...]
    theta: tuple[float, ...]

    def __post_init__(self):
        n = len(self.a)
        if any(len(v) != n for v in (self.c, self.w, self.omega, self.theta)):
            raise ValueError("term parameter lists differ in length")
        if any(w <= 0 for w in self.w):
            raise ValueError("widths must be positive")

    @classmethod
    def zero(cls) -> "GaussianWave":
        return cls((), (), (), (), ())

    def _terms(self, t, x):
        t = np.asarray(t, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        for a, c, w, om, th in zip(self.a, self.c, self.w, self.omega, self.theta):
            z = (x - c) / w
            yield a, z, w, om, om * t + th, np.exp(-z * z)

    def _sum(self, t, x, term) -> np.ndarray:
        out = np.zeros(np.broadcast_shapes(np.shape(t), np.shape(x)))
        for a, z, w, om, ph, gx in self._terms(t, x):
            out = out + term(a, z, w, om, ph, gx)
        return out

    def __call__(self, t, x):
        return self._sum(t, x, lambda a, z, w, om, ph, gx: a * gx * np.cos(ph))

    def dt(self, t, x):
        return self._sum(t, x, lambda a, z, w, om, ph, gx: -a * om * gx * np.sin(ph))

    def dx(self, t, x):
        return self._sum(t, x, lambda a, z, w, om, ph, gx: -2 * a * z / w * gx * np.cos(ph))

    def support_radius(self, tol: float = SUPPORT_TOL) -> float:
        """Distance from the origin beyond which ``|g| <= tol * sum |a|``."""
        if not self.a:
            return 0.0
        r = math.sqrt(-math.log(tol))
        return max(abs(c) + r * w for c, w in zip(self.c, self.w))


def random_wave(rng: np.random.Generator, terms: int = 3, center: float = 3.0, omega_max: float = 4.0) -> GaussianWave:
    """Random smooth generator with centers in ``[-center, center]`` and widths in ``[0.3, 1]``."""
    return GaussianWave(
        a=tuple(rng.standard_normal(terms)),
        c=tuple(rng.uniform(-center, center, terms)),
        w=tuple(rng.uniform(0.3, 1.0, terms)),
        omega=tuple(rng.uniform(0.0, omega_max, terms)),
        theta=tuple(rng.uniform(0.0, 2 * math.pi, terms)),
    )


def _fd(g: Callable, t, x, axis: int, h: float) -> np.ndarray:
    def at(s):
        return g(t + s, x) if axis == 0 else g(t, x + s)

    return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)


def _derivative(g: Callable, name: str, t, x, h: float = 1e-3) -> tuple[np.ndarray, float]:
    """Analytic derivative when offered, else differences plus an error estimate."""
    fn = getattr(g, name, None)
    if callable(fn):
        return np.asarray(fn(t, x), dtype=np.float64), 0.0
    axis = 0 if name == "dt" else 1
    fine = _fd(g, t, x, axis, h)
    coarse = _fd(g, t, x, axis, 2 * h)
    return fine, float(np.max(np.abs(fine - coarse))) if fine.size else 0.0


# ---------------------------------------------------------------- quadrature


@lru_cache(maxsize=32)
def _panel_rule(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss nodes, weights and the cumulative integration matrix on ``[-1, 1]``."""
    s, w = np.polynomial.legendre.leggauss(m)
    V = np.polynomial.legendre.legvander(s, m - 1)
    # int_{-1}^{s} P_k = (P_{k+1} - P_{k-1}) / (2k + 1), and s + 1 for k = 0
    big = np.polynomial.legendre.legvander(s, m)
    A = np.empty((m, m))
    A[:, 0] = s + 1
    for k in range(1, m):
        A[:, k] = (big[:, k + 1] - big[:, k - 1]) / (2 * k + 1)
    S = np.linalg.solve(V.T, A.T).T
    return s, w, S


@dataclass(frozen=True)
class CompositeRule:
    """Composite Gauss rule on ``[a, b]`` with ``panels`` panels of ``m`` nodes."""

    a: float
    b: float
    panels: int
    m: int = 16

    @property
    def nodes(self) -> np.ndarray:
        s, _, _ = _panel_rule(self.m)
        edges = np.linspace(self.a, self.b, self.panels + 1)
        h = 0.5 * np.diff(edges)
        return ((edges[:-1] + h)[:, None] + h[:, None] * s[None, :]).ravel()

    @property
    def weights(self) -> np.ndarray:
        _, w, _ = _panel_rule(self.m)
        h = 0.5 * (self.b - self.a) / self.panels
        return np.tile(h * w, self.panels)

    def refined(self) -> "CompositeRule":
        return CompositeRule(self.a, self.b, 2 * self.panels, self.m)

    def cumulative(self, f: np.ndarray) -> np.ndarray:
        """``int_a^x f`` at the nodes, along the last axis of ``f``."""
        _, w, S = _panel_rule(self.m)
        h = 0.5 * (self.b - self.a) / self.panels
        fp = f.reshape(f.shape[:-1] + (self.panels, self.m))
        inner = h * np.einsum("ij,...pj->...pi", S, fp)
        totals = h * (fp @ w)
        offsets = np.cumsum(totals, axis=-1) - totals
        return (inner + offsets[..., None]).reshape(f.shape)


# ---------------------------------------------------------------- system


@dataclass(frozen=True, eq=False)
class DivCurlSystem:
    """Sampled fields and sources on a tensor Gauss lattice of ``[0, T] x [-X, X]``.

    Arrays ``f11 .. G2`` have shape ``(nt, nx)``; ``*_0`` and ``*_T`` rows hold
    the boundary-time samples on the ``x`` nodes.
    """

    T: float
    X: float
    t_rule: CompositeRule
    x_rule: CompositeRule
    f11: np.ndarray
    f12: np.ndarray
    f21: np.ndarray
    f22: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    f11_0: np.ndarray
    f11_T: np.ndarray
    f21_0: np.ndarray
    f21_T: np.ndarray
    source_error: float = 0.0
    generators: tuple = field(default=(), repr=False)
    margin: float = 1.0

    @property
    def amplitude(self) -> float:
        return max(float(np.max(np.abs(a))) if a.size else 0.0 for a in (self.f11, self.f12, self.f21, self.f22))

    def refined(self) -> "DivCurlSystem":
        if not self.generators:
            raise ValueError("system was not built from generators and cannot be refined")
        return _assemble(self.generators, self.T, self.X, self.t_rule.refined(), self.x_rule.refined(), self.margin)

    def _xint(self, a: np.ndarray) -> np.ndarray:
        return a @ self.x_rule.weights

    def _txint(self, a: np.ndarray) -> float:
        return float(self.t_rule.weights @ self._xint(a))


def _assemble(gens, T, X, t_rule, x_rule, margin) -> DivCurlSystem:
    g11, g12, g21, g22 = gens
    t = t_rule.nodes[:, None]
    x = x_rule.nodes[None, :]
    f = [np.asarray(g(t, x), dtype=np.float64) * np.ones((t.size, x.size)) for g in gens]
    d11, e1 = _derivative(g11, "dt", t, x)
    d12, e2 = _derivative(g12, "dx", t, x)
    d21, e3 = _derivative(g21, "dt", t, x)
    d22, e4 = _derivative(g22, "dx", t, x)
    top = max(float(np.max(np.abs(a))) for a in f)
    edge = np.abs(x_rule.nodes) > X - margin
    for name, a in zip(("f11", "f12", "f21", "f22"), f):
        if top > 0 and np.any(edge) and np.max(np.abs(a[:, edge])) > SUPPORT_TOL * top:
            raise ValueError(f"{name} does not vanish within {margin} of x = +-{X}")
    xs = x_rule.nodes
    row = lambda g, s: np.asarray(g(np.float64(s), xs), dtype=np.float64) * np.ones(xs.size)
    return DivCurlSystem(
        T=T,
        X=X,
        t_rule=t_rule,
        x_rule=x_rule,
        f11=f[0],
        f12=f[1],
        f21=f[2],
        f22=f[3],
        G1=(d11 + d12) * np.ones_like(f[0]),
        G2=(d21 - d22) * np.ones_like(f[0]),
        f11_0=row(g11, 0.0),
        f11_T=row(g11, T),
        f21_0=row(g21, 0.0),
        f21_T=row(g21, T),
        source_error=max(e1 + e2, e3 + e4),
        generators=tuple(gens),
        margin=margin,
    )


def build_system(
    f11: Callable,
    f12: Callable,
    f21: Callable,
    f22: Callable,
    T: float = 1.0,
    X: float = 10.0,
    resolution: tuple[int, int] = (4, 40),
    nodes_per_panel: int = 16,
    margin: float = 1.0,
) -> DivCurlSystem:
    """Sample the four generators and their sources on ``resolution = (t panels, x panels)``."""
    if T <= 0 or X <= 0 or not 0 <= margin < X:
        raise ValueError("need T > 0, X > 0 and 0 <= margin < X")
    pt, px = resolution
    t_rule = CompositeRule(0.0, float(T), int(pt), nodes_per_panel)
    x_rule = CompositeRule(-float(X), float(X), int(px), nodes_per_panel)
    return _assemble((f11, f12, f21, f22), float(T), float(X), t_rule, x_rule, float(margin))


def random_system(rng: np.random.Generator, T: float = 1.0, X: float = 10.0, **kw) -> DivCurlSystem:
    gens = [random_wave(rng) for _ in range(4)]
    return build_system(*gens, T=T, X=X, **kw)


# ---------------------------------------------------------------- terms


def _raw_pairing(sys: DivCurlSystem) -> float:
    return sys._txint(sys.f11 * sys.f22 + sys.f12 * sys.f21)


def _raw_terms(sys: DivCurlSystem) -> tuple[float, float, float]:
    cum = sys.x_rule.cumulative
    wx = sys.x_rule.weights
    a1 = float(wx @ (sys.f21_0 * cum(sys.f11_0)) - wx @ (sys.f21_T * cum(sys.f11_T)))
    a2 = sys._txint(sys.f21 * cum(sys.G1))
    a3 = sys._txint(sys.G2 * cum(sys.f11))
    return a1, a2, a3


def _certified(sys: DivCurlSystem, fn, rtol: float):
    coarse = np.atleast_1d(fn(sys))
    fine = np.atleast_1d(fn(sys.refined()))
    scale = max(float(np.max(np.abs(fine))), float(np.max(np.abs(coarse))))
    atol = 1e-14 * max(sys.amplitude**2, 1e-300) * sys.T * sys.X
    if np.max(np.abs(fine - coarse)) > max(rtol * scale, atol):
        raise ConvergenceError(coarse.tolist(), fine.tolist(), rtol)
    return fine


def pairing_integral(sys: DivCurlSystem, rtol: float = PAIRING_RTOL) -> float:
    """``int_0^T int f11 f22 + f12 f21`` with a panel-doubling self-check."""
    if not sys.generators:
        return _raw_pairing(sys)
    return float(_certified(sys, _raw_pairing, rtol)[0])


def proof_terms(sys: DivCurlSystem, rtol: float = PAIRING_RTOL) -> tuple[float, float, float]:
    """``(A1, A2, A3)`` with a panel-doubling self-check."""
    if not sys.generators:
        return _raw_terms(sys)
    a1, a2, a3 = _certified(sys, lambda s: np.array(_raw_terms(s)), rtol)
    return float(a1), float(a2), float(a3)


def identity_residual(sys: DivCurlSystem) -> float:
    """``|pairing - (A1 + A2 + A3)|`` relative to the largest of the four values."""
    p = pairing_integral(sys)
    terms = proof_terms(sys)
    scale = max(abs(p), *map(abs, terms))
    return 0.0 if scale == 0 else abs(p - math.fsum(terms)) / scale


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float
    ok: bool
    term_bounds: tuple[float, float, float]
    term_ok: tuple[bool, bool, bool]


def _norms(sys: DivCurlSystem) -> dict[str, float]:
    wx = sys.x_rule.weights
    l1 = lambda a: np.abs(a) @ wx
    sup = lambda a, a0, aT: float(max(np.max(l1(a)), l1(a0), l1(aT)))
    return dict(
        f11_0=float(l1(sys.f11_0)),
        f11_T=float(l1(sys.f11_T)),
        f21_0=float(l1(sys.f21_0)),
        f21_T=float(l1(sys.f21_T)),
        f11_sup=sup(sys.f11, sys.f11_0, sys.f11_T),
        f21_sup=sup(sys.f21, sys.f21_0, sys.f21_T),
        G1=sys._txint(np.abs(sys.G1)),
        G2=sys._txint(np.abs(sys.G2)),
    )


def check_lemma_bound(sys: DivCurlSystem) -> tuple[float, float, bool]:
    """``(lhs, rhs, lhs <= C_DC rhs)`` for the pairing bound."""
    r = bound_report(sys)
    return r.lhs, r.rhs, r.ok


def bound_report(sys: DivCurlSystem) -> BoundReport:
    """The pairing bound together with the three per-term bounds."""
    nm = _norms(sys)
    lhs = abs(pairing_integral(sys))
    rhs = (nm["f11_0"] + nm["f11_sup"] + nm["G1"]) * (nm["f21_0"] + nm["f21_sup"] + nm["G2"])
    a1, a2, a3 = proof_terms(sys)
    b = (
        nm["f11_0"] * nm["f21_0"] + nm["f11_T"] * nm["f21_T"],
        nm["f21_sup"] * nm["G1"],
        nm["f11_sup"] * nm["G2"],
    )
    ok_terms = tuple(bool(abs(a) <= C_DC * bb) for a, bb in zip((a1, a2, a3), b))
    return BoundReport(lhs, rhs, bool(lhs <= C_DC * rhs), b, ok_terms)


def check_det_identity(sys: DivCurlSystem) -> float:
    """Max over the lattice of ``|f11 f22 + f12 f21 - det[[f11, -f12], [f21, f22]]|``."""
    m = np.stack([np.stack([sys.f11, -sys.f12], -1), np.stack([sys.f21, sys.f22], -1)], -2)
    det = np.linalg.det(m)
    direct = sys.f11 * sys.f22 + sys.f12 * sys.f21
    return float(np.max(np.abs(direct - det))) if det.size else 0.0
