"""Estimate records, sweep reports, scaling fits and CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

CSV_COLUMNS = ("n", "N", "L", "nullform", "mu", "lam", "seed", "lhs", "rhs", "ratio")


@dataclass(frozen=True)
class EstimateRecord:
    """One comparison ``lhs <~ rhs`` for a ``(mu, lam, seed)`` cell."""

    n: int
    N: int
    L: float
    nullform: str
    mu: float
    lam: float
    seed: int
    lhs: float
    rhs: float
    ratio: float = float("nan")

    def __post_init__(self):
        for name in ("L", "mu", "lam", "lhs", "rhs"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (math.isfinite(self.lhs) and math.isfinite(self.rhs)):
            raise ValueError(f"non-finite record values lhs={self.lhs} rhs={self.rhs}")
        if self.rhs <= 0:
            raise ValueError(f"record rhs must be positive, got {self.rhs}")
        if self.lhs < 0:
            raise ValueError(f"record lhs must be nonnegative, got {self.lhs}")
        object.__setattr__(self, "ratio", self.lhs / self.rhs)

    @property
    def cell(self) -> tuple[str, float, float]:
        return (self.nullform, self.mu, self.lam)

    @property
    def key(self) -> tuple:
        return (self.nullform, self.mu, self.lam, self.seed)

    def row(self) -> list[str]:
        return [str(self.n), str(self.N), repr(self.L), self.nullform, repr(self.mu), repr(self.lam),
                str(self.seed), repr(self.lhs), repr(self.rhs), repr(self.ratio)]


def cell_stats(records: Iterable[EstimateRecord]) -> dict[tuple, dict[str, float]]:
    """Per ``(nullform, mu, lam)`` sup and median of ratio and lhs over seeds."""
    groups: dict[tuple, list[EstimateRecord]] = {}
    for r in records:
        groups.setdefault(r.cell, []).append(r)
    out = {}
    for cell in sorted(groups):
        rs = groups[cell]
        ratios = [r.ratio for r in rs]
        lhs = [r.lhs for r in rs]
        out[cell] = dict(
            sup_ratio=max(ratios),
            median_ratio=float(np.median(ratios)),
            sup_lhs=max(lhs),
            count=len(rs),
        )
    return out


def spread(records: Iterable[EstimateRecord], kind: str | None = None) -> float:
    """``max / median`` of the per-cell sup ratios (optionally for one null form)."""
    stats = cell_stats(r for r in records if kind is None or r.nullform == kind)
    sups = [s["sup_ratio"] for s in stats.values()]
    if not sups:
        raise ValueError("no records")
    med = float(np.median(sups))
    if med == 0:
        return math.inf if max(sups) > 0 else 1.0
    return max(sups) / med


def fit_scaling_exponent(
    records: Iterable[EstimateRecord],
    lam: float | None = None,
    kind: str | None = None,
    value: str = "lhs",
) -> tuple[float, float]:
    """Least-squares slope of ``log sup-over-seeds value`` against ``log mu`` at fixed ``lam``.

    ``lam`` defaults to the largest present.  Cells whose sup is zero are
    dropped with a warning.  Returns ``(slope, rms residual)``.
    """
    recs = [r for r in records if kind is None or r.nullform == kind]
    if not recs:
        raise ValueError("no records to fit")
    lam = max(r.lam for r in recs) if lam is None else float(lam)
    sup: dict[float, float] = {}
    for r in recs:
        if r.lam == lam:
            v = getattr(r, value)
            sup[r.mu] = max(sup.get(r.mu, 0.0), v)
    zero = [m for m, v in sup.items() if v <= 0]
    if zero:
        warnings.warn(f"excluding mu={sorted(zero)} from the fit: sup {value} is zero", RuntimeWarning, stacklevel=2)
    pts = sorted((m, v) for m, v in sup.items() if v > 0)
    if len(pts) < 3:
        raise ValueError(f"need >= 3 distinct mu with nonzero {value} at lam={lam}, got {len(pts)}")
    x = np.log([m for m, _ in pts])
    y = np.log([v for _, v in pts])
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(math.sqrt(np.mean(res**2)))


@dataclass
class EstimateReport:
    """Records of one driver run plus its configuration and acceptance checks."""

    name: str
    records: list[EstimateRecord]
    config: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: r.key)
        # JSON-native containers, so a round trip compares equal
        self.config = json.loads(json.dumps(_jsonable(self.config)))
        self.checks = json.loads(json.dumps(_jsonable(self.checks)))

    @property
    def passed(self) -> bool:
        return all(bool(c.get("ok")) for c in self.checks.values())

    def summary(self) -> dict[str, Any]:
        if not self.records:
            raise ValueError("empty report")
        ratios = [r.ratio for r in self.records]
        try:
            slope, residual = fit_scaling_exponent(self.records, kind=self.records[0].nullform)
        except ValueError:
            slope, residual = None, None
        cells = [
            dict(nullform=c[0], mu=c[1], lam=c[2], **s) for c, s in cell_stats(self.records).items()
        ]
        return dict(
            sup_ratio=max(ratios),
            median_ratio=float(np.median(ratios)),
            slope=slope,
            residual=residual,
            config=self.config,
            cells=cells,
            checks=self.checks,
            passed=self.passed,
        )

    def to_csv(self) -> str:
        if not self.records:
            raise ValueError("empty report")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow(r.row())
        return buf.getvalue()

    def to_json(self) -> str:
        if not self.records:
            raise ValueError("empty report")
        doc = dict(name=self.name, records=[{k: v for k, v in asdict(r).items()} for r in self.records],
                   summary=self.summary())
        return json.dumps(_jsonable(doc), indent=1, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "EstimateReport":
        doc = json.loads(text)
        recs = [EstimateRecord(**{k: v for k, v in r.items() if k != "ratio"}) for r in doc["records"]]
        s = doc["summary"]
        return cls(doc["name"], recs, s.get("config", {}), s.get("checks", {}))

    @classmethod
    def from_csv(cls, text: str, name: str = "report") -> "EstimateReport":
        rows = list(csv.DictReader(io.StringIO(text)))
        recs = [
            EstimateRecord(int(r["n"]), int(r["N"]), float(r["L"]), r["nullform"], float(r["mu"]), float(r["lam"]),
                           int(r["seed"]), float(r["lhs"]), float(r["rhs"]))
            for r in rows
        ]
        return cls(name, recs)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating,)):
        x = float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def emit_report(report: EstimateReport, path: str | Path, fmt: str = "csv") -> Path:
    """Write ``report`` as CSV or JSON; unwritable paths raise ``OSError`` naming the path."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    text = report.to_csv() if fmt == "csv" else report.to_json()
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e.strerror or e}") from e
    return path
