"""Sweep configuration: JSON loading, ``KEY=VALUE`` overrides and validation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

from ..decomposition import _is_dyadic
from ..nullforms import NullFormKind
from ..spectral import GridSpec


class ConfigError(ValueError):
    """Malformed or inconsistent sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of one driver run.

    ``pairs`` lists explicit ``[mu, lam]`` cells; when absent the cells are all
    ``mu`` in ``mu_list`` (default: every power of two from ``mu_min``) with
    ``mu <= lam`` for each ``lam`` in ``lam_list``.
    """

    dim: int = 2
    grid: int = 64
    box_scale: float = 1.0
    lam_list: tuple[float, ...] = (8.0, 16.0)
    mu_list: tuple[float, ...] | None = None
    mu_min: float = 1.0
    pairs: tuple[tuple[float, float], ...] | None = None
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    nullforms: tuple[str, ...] = ("Q0",)
    shells: tuple[float, ...] = ()
    nodes_per_panel: int = 16
    rtol: float = 1e-9
    chain_ratio: float = 2.0
    oversample: int = 4
    draws: int = 20
    T: float = 1.0
    X: float = 10.0
    workers: int = 1

    def __post_init__(self):
        conv = dict(
            lam_list=lambda v: tuple(float(x) for x in v),
            mu_list=lambda v: None if v is None else tuple(float(x) for x in v),
            pairs=lambda v: None if v is None else tuple((float(p[0]), float(p[1])) for p in v),
            seeds=lambda v: tuple(int(s) for s in v),
            nullforms=lambda v: (v,) if isinstance(v, str) else tuple(str(s) for s in v),
            shells=lambda v: tuple(float(x) for x in v),
        )
        for k, f in conv.items():
            try:
                object.__setattr__(self, k, f(getattr(self, k)))
            except (TypeError, ValueError, IndexError) as e:
                raise ConfigError(f"bad value for {k}: {getattr(self, k)!r} ({e})") from None
        for k, t in (("dim", int), ("grid", int), ("box_scale", float), ("mu_min", float), ("nodes_per_panel", int),
                     ("rtol", float), ("chain_ratio", float), ("oversample", int), ("draws", int), ("T", float),
                     ("X", float), ("workers", int)):
            try:
                object.__setattr__(self, k, t(getattr(self, k)))
            except (TypeError, ValueError):
                raise ConfigError(f"{k} must be {t.__name__}, got {getattr(self, k)!r}") from None

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec(self.dim, self.grid, self.box_scale)

    def cells(self) -> list[tuple[float, float]]:
        """Sorted ``(mu, lam)`` cells."""
        if self.pairs is not None:
            return sorted(set(self.pairs))
        out = set()
        for lam in self.lam_list:
            if self.mu_list is not None:
                mus = [m for m in self.mu_list if m <= lam]
            else:
                mus, m = [], self.mu_min
                while m <= lam:
                    mus.append(m)
                    m *= 2
            out.update((m, lam) for m in mus)
        return sorted(out)

    def validate(self) -> "SweepConfig":
        """Check consistency; raises ``ConfigError`` naming the offending value."""
        if self.dim not in (2, 3):
            raise ConfigError(f"dim must be 2 or 3, got {self.dim}")
        try:
            self.grid_spec
        except ValueError as e:
            raise ConfigError(str(e)) from None
        for name in ("lam_list", "shells"):
            for v in getattr(self, name):
                if not _is_dyadic(v):
                    raise ConfigError(f"{name} entry {v} is not a power of two")
        for v in self.mu_list or ():
            if not _is_dyadic(v):
                raise ConfigError(f"mu_list entry {v} is not a power of two")
        if not _is_dyadic(self.mu_min):
            raise ConfigError(f"mu_min {self.mu_min} is not a power of two")
        for mu, lam in self.pairs or ():
            if not (_is_dyadic(mu) and _is_dyadic(lam)):
                raise ConfigError(f"pair (mu={mu}, lam={lam}) is not dyadic")
            if mu > lam:
                raise ConfigError(f"pair (mu={mu}, lam={lam}) violates mu <= lam")
        if self.pairs is None and self.mu_list is not None and self.lam_list:
            bad = [m for m in self.mu_list if m > max(self.lam_list)]
            if bad:
                raise ConfigError(f"mu={bad[0]} exceeds every lam in {list(self.lam_list)} (pair mu > lam)")
        top = max([lam for _, lam in self.cells()] + list(self.shells) + [0.0])
        if 2 * top * self.box_scale > self.grid / 2:
            raise ConfigError(
                f"lam={top} leaves no room for de-aliased products on N={self.grid}, L={self.box_scale} "
                f"(need 2*lam*L <= N/2)"
            )
        if not self.seeds:
            raise ConfigError("seed list is empty")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")
        for tag in self.nullforms:
            try:
                NullFormKind.parse(tag).check_dim(self.dim)
            except ValueError as e:
                raise ConfigError(str(e)) from None
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.nodes_per_panel < 2 or not 0 < self.rtol < 1:
            raise ConfigError("need nodes_per_panel >= 2 and 0 < rtol < 1")
        return self

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("workers")  # execution detail; reports must not depend on it
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path, base: "SweepConfig | None" = None) -> "SweepConfig":
        """Read a JSON object of ``SweepConfig`` fields and lay it over ``base``."""
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot parse config {path}: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return (base or cls()).with_overrides(doc)

    def with_overrides(self, items: dict[str, Any]) -> "SweepConfig":
        known = {f.name for f in fields(self)}
        unknown = sorted(set(items) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return replace(self, **items)


def parse_override(text: str) -> tuple[str, Any]:
    """``KEY=VALUE`` with ``VALUE`` read as JSON when possible, else as a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not KEY=VALUE")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw
    return key, val


#: Default runs of each driver (the acceptance configurations).
DEFAULTS: dict[str, list[SweepConfig]] = {
    "wbes": [SweepConfig(dim=2, grid=256, lam_list=(8, 16, 32, 64), seeds=tuple(range(10)), nullforms=("Q0", "Q01"))],
    "dwbes": [SweepConfig(dim=3, grid=64, lam_list=(8, 16), seeds=tuple(range(5)), nullforms=("Q12",))],
    "ges": [SweepConfig(dim=2, grid=64, pairs=((4, 8), (8, 16)), seeds=tuple(range(5)))],
    "sector": [
        SweepConfig(dim=2, grid=512, box_scale=0.5, lam_list=(256,), mu_list=(16, 64, 256), seeds=(0, 1, 2),
                    nullforms=("Q0",))
    ],
    "strichartz": [SweepConfig(dim=3, grid=128, lam_list=(8, 16, 32), seeds=tuple(range(5)))],
    "corollary": [
        SweepConfig(dim=2, grid=64, shells=(4, 8, 16), lam_list=(), seeds=tuple(range(5)), nullforms=("Q0", "Q01")),
        SweepConfig(dim=3, grid=32, shells=(2, 4, 8), lam_list=(), seeds=tuple(range(5)), nullforms=("Q12",)),
    ],
    "divcurl": [SweepConfig(dim=2, lam_list=(), seeds=(0,), nullforms=("Q0",), draws=20)],
}
