"""Data generation, verification drivers, records and sweep configuration."""

from .config import DEFAULTS, ConfigError, SweepConfig
from .data import cell_stream, multi_shell_data, plane_wave_data, random_shell_data, stream
from .drivers import (
    DRIVERS,
    bilinear_norms,
    ges_terms,
    l4_spacetime_norm,
    verify_dwbes_pair,
    verify_ges,
    verify_sector_estimate,
    verify_strichartz_l4,
    verify_wbes_pair,
)
from .records import EstimateRecord, EstimateReport, emit_report, fit_scaling_exponent

__all__ = [
    "bilinear_norms",
    "cell_stream",
    "ConfigError",
    "DEFAULTS",
    "DRIVERS",
    "emit_report",
    "EstimateRecord",
    "EstimateReport",
    "fit_scaling_exponent",
    "ges_terms",
    "l4_spacetime_norm",
    "multi_shell_data",
    "plane_wave_data",
    "random_shell_data",
    "stream",
    "SweepConfig",
    "verify_dwbes_pair",
    "verify_ges",
    "verify_sector_estimate",
    "verify_strichartz_l4",
    "verify_wbes_pair",
]
