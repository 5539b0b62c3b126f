"""Null forms of two free waves and the operator ``(-Laplace)^{-1/2}``.

Index convention: ``0`` is time, ``1..n`` are the spatial coordinates.

    Q0(a, b)       = a_t b_t - grad a . grad b
    Q_{ab}(u, v)   = d_a u d_b v - d_b u d_a v          (0 <= a < b <= n)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .propagator import WaveSnapshot
from .spectral import (
    RealField,
    SpectralField,
    evaluate,
    l2_norm_spectral,
    lp_norm_physical,
    partial_derivative,
    product_grid,
    to_physical,
    to_spectral,
)


@dataclass(frozen=True)
class NullFormKind:
    """``Q0`` (alpha = beta = None) or ``Q_{alpha beta}`` with ``alpha < beta``."""

    alpha: int | None = None
    beta: int | None = None

    def __post_init__(self):
        if (self.alpha is None) != (self.beta is None):
            raise ValueError("give both indices or neither")
        if self.alpha is not None and not 0 <= self.alpha < self.beta:
            raise ValueError(f"need 0 <= alpha < beta, got ({self.alpha}, {self.beta})")

    @classmethod
    def parse(cls, tag: str) -> "NullFormKind":
        tag = tag.strip()
        if tag.upper() == "Q0":
            return cls()
        m = re.fullmatch(r"Q_?\{?(\d),?(\d)\}?", tag, flags=re.IGNORECASE)
        if not m:
            raise ValueError(f"unrecognised null form {tag!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    @property
    def is_q0(self) -> bool:
        return self.alpha is None

    @property
    def tag(self) -> str:
        return "Q0" if self.is_q0 else f"Q{self.alpha}{self.beta}"

    def check_dim(self, n: int) -> None:
        if not self.is_q0 and self.beta > n:
            raise ValueError(f"{self.tag} needs dimension >= {self.beta}, got {n}")

    def derivatives(self, n: int) -> tuple[int, ...]:
        return tuple(range(n + 1)) if self.is_q0 else (self.alpha, self.beta)

    def combine(self, da: dict[int, np.ndarray], db: dict[int, np.ndarray], n: int) -> np.ndarray:
        """Evaluate the form from sampled derivatives ``d_alpha a`` and ``d_alpha b``."""
        if self.is_q0:
            out = da[0] * db[0]
            for i in range(1, n + 1):
                out = out - da[i] * db[i]
            return out
        a, b = self.alpha, self.beta
        return da[a] * db[b] - da[b] * db[a]


def _check_pair(a: WaveSnapshot, b: WaveSnapshot) -> None:
    if a.grid != b.grid:
        raise ValueError(f"snapshots live on different grids: {a.grid} vs {b.grid}")
    if abs(a.t - b.t) > 1e-14 * max(1.0, abs(a.t)):
        raise ValueError(f"snapshots at different times: {a.t} vs {b.t}")


def _sampled(s: WaveSnapshot, alphas, sizes) -> dict[int, np.ndarray]:
    return {al: evaluate(s.derivative(al), sizes) for al in alphas}


def null_form(kind: NullFormKind, a: WaveSnapshot, b: WaveSnapshot) -> RealField:
    """Any null form, de-aliased, on the exact product grid."""
    _check_pair(a, b)
    n = a.grid.dim
    kind.check_dim(n)
    out = product_grid(a.grid, a.bandwidth() + b.bandwidth())
    al = kind.derivatives(n)
    return RealField(out, kind.combine(_sampled(a, al, out.shape), _sampled(b, al, out.shape), n))


def q0(a: WaveSnapshot, b: WaveSnapshot) -> RealField:
    return null_form(NullFormKind(), a, b)


def q_alpha_beta(alpha: int, beta: int, a: WaveSnapshot, b: WaveSnapshot) -> RealField:
    return null_form(NullFormKind(alpha, beta), a, b)


def inv_sqrt_laplacian(f: RealField | SpectralField) -> RealField:
    """Multiplier ``L/|k|`` on zero-mean data; the mean mode stays zero."""
    fs = f if isinstance(f, SpectralField) else to_spectral(f)
    return to_physical(inv_sqrt_laplacian_spectral(fs))


def inv_sqrt_laplacian_spectral(f: SpectralField) -> SpectralField:
    g = f.grid
    origin = (0,) * g.dim
    norm = l2_norm_spectral(f)
    mean = abs(f.coeffs[origin]) * math.sqrt(g.volume)
    if norm > 0 and mean > 1e-12 * norm:
        raise ValueError(f"(-Laplace)^(-1/2) needs zero-mean input (mean part {mean:.3e}, norm {norm:.3e})")
    w = g.wave_speed()
    c = np.divide(f.coeffs, w, out=np.zeros_like(f.coeffs), where=w > 0)
    return SpectralField(g, c)


def check_qij_divergence_identity(i: int, j: int, a: WaveSnapshot, b: WaveSnapshot) -> float:
    """Relative ``L^2`` residual of ``Q_ij(a, b) = d_i(a d_j b) - d_j(a d_i b)`` (1-based i, j)."""
    if i == j:
        raise ValueError("the identity needs i != j")
    _check_pair(a, b)
    n = a.grid.dim
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"spatial indices must lie in 1..{n}")
    lo, hi = min(i, j), max(i, j)
    sign = 1.0 if i < j else -1.0
    lhs = null_form(NullFormKind(lo, hi), a, b) * sign
    sizes = lhs.grid.shape
    ua = evaluate(a.u_hat, sizes)
    pj = RealField(lhs.grid, ua * evaluate(partial_derivative(b.u_hat, j - 1), sizes))
    pi_ = RealField(lhs.grid, ua * evaluate(partial_derivative(b.u_hat, i - 1), sizes))
    rhs_hat = partial_derivative(to_spectral(pj), i - 1) - partial_derivative(to_spectral(pi_), j - 1)
    rhs = to_physical(rhs_hat)
    scale = max(lp_norm_physical(lhs), lp_norm_physical(pj), lp_norm_physical(pi_))
    if scale == 0:
        return 0.0
    return lp_norm_physical(lhs - rhs) / scale
