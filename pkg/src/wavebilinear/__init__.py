"""Spectral tools for free waves on the torus and empirical checks of bilinear null-form estimates."""

from .spectral import (
    GridSpec,
    RealField,
    ResourceError,
    SpectralField,
    dealiased_product,
    evaluate,
    lp_norm_physical,
    to_physical,
    to_spectral,
)
from .propagator import CauchyData, WaveSnapshot, energy, evolve
from .decomposition import (
    AngularSector,
    DyadicShell,
    SectorFamily,
    build_sector_family,
    lp_project,
    sector_project,
)
from .nullforms import NullFormKind, inv_sqrt_laplacian, null_form, q0, q_alpha_beta
from .functionals import (
    ConvergenceError,
    SliceProfile,
    TimeQuadrature,
    besov_norm,
    homogeneous_sobolev_norm,
    slice_functionals,
    spacetime_norm,
)

__all__ = [
    "AngularSector",
    "besov_norm",
    "build_sector_family",
    "CauchyData",
    "ConvergenceError",
    "dealiased_product",
    "DyadicShell",
    "energy",
    "evaluate",
    "evolve",
    "GridSpec",
    "homogeneous_sobolev_norm",
    "inv_sqrt_laplacian",
    "lp_norm_physical",
    "lp_project",
    "null_form",
    "NullFormKind",
    "q0",
    "q_alpha_beta",
    "RealField",
    "ResourceError",
    "sector_project",
    "SectorFamily",
    "slice_functionals",
    "SliceProfile",
    "spacetime_norm",
    "SpectralField",
    "TimeQuadrature",
    "to_physical",
    "to_spectral",
    "WaveSnapshot",
]

__version__ = "0.1.0"
