"""Command-line front end for the verification drivers.

    wavebilinear SUBCOMMAND [--config PATH] [--output PATH] [--format csv|json]
                 [--workers K] [--seed-list 0,1,2] [--grid N] [--dim {2,3}]
                 [--box-scale L] [--set KEY=VALUE ...]

Exit status: 0 when every acceptance check passes, 1 when a check fails (the
report is still written), 2 for usage, configuration or output errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness.config import DEFAULTS, ConfigError, SweepConfig, parse_override
from .harness.drivers import DRIVERS
from .harness.records import EstimateReport, emit_report

SUBCOMMANDS = ("divcurl", "wbes", "dwbes", "ges", "sector", "strichartz", "corollary", "all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wavebilinear", description="Empirical checks of bilinear null-form estimates for free waves.")
    p.add_argument("subcommand", choices=SUBCOMMANDS, help="driver to run")
    p.add_argument("--config", type=Path, help="JSON file of sweep fields (laid over the driver defaults)")
    p.add_argument("--output", type=Path, help="report path (default: <subcommand>_report.<format>)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, help="worker processes for the sweep")
    p.add_argument("--seed-list", help="comma-separated seeds, e.g. 0,1,2")
    p.add_argument("--grid", type=int, help="points per axis N")
    p.add_argument("--dim", type=int, choices=(2, 3), help="space dimension")
    p.add_argument("--box-scale", type=float, help="box scale L (torus [0, 2 pi L)^n)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config field")
    return p


def _overrides(args) -> dict:
    over = {}
    if args.seed_list is not None:
        try:
            over["seeds"] = [int(s) for s in args.seed_list.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"--seed-list must be comma-separated integers, got {args.seed_list!r}") from None
    for flag, key in (("grid", "grid"), ("dim", "dim"), ("box_scale", "box_scale"), ("workers", "workers")):
        v = getattr(args, flag)
        if v is not None:
            over[key] = v
    for item in args.set:
        k, v = parse_override(item)
        over[k] = v
    return over


def resolve_configs(sub: str, config: Path | None, over: dict) -> list[SweepConfig]:
    """Driver defaults, then the config file, then command-line overrides."""
    bases = DEFAULTS[sub]
    if "dim" in over and len(bases) > 1:
        bases = [b for b in bases if b.dim == over["dim"]] or bases[:1]
    out = []
    for b in bases:
        cfg = SweepConfig.load(config, b) if config is not None else b
        out.append(cfg.with_overrides(over).validate())
    return out


def _merge(name: str, reports: list[EstimateReport]) -> EstimateReport:
    if len(reports) == 1:
        return reports[0]
    recs = [r for rep in reports for r in rep.records]
    checks = {f"{i}.{k}": v for i, rep in enumerate(reports) for k, v in rep.checks.items()}
    return EstimateReport(name, recs, {"runs": [rep.config for rep in reports]}, checks)


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 2
    except SystemExit as e:  # --help
        return int(e.code or 0)
    subs = [s for s in SUBCOMMANDS if s != "all"] if args.subcommand == "all" else [args.subcommand]
    try:
        over = _overrides(args)
        plans = [(s, resolve_configs(s, args.config, over)) for s in subs]
    except ConfigError as e:
        print(f"wavebilinear: config error: {e}", file=sys.stderr)
        return 2
    reports = []
    for sub, cfgs in plans:
        try:
            rep = _merge(sub, [DRIVERS[sub](c) for c in cfgs])
        except ConfigError as e:
            print(f"wavebilinear: config error: {e}", file=sys.stderr)
            return 2
        reports.append(rep)
        status = "PASS" if rep.passed else "FAIL"
        print(f"{sub}: {status}")
        for name, c in rep.checks.items():
            print(f"  {name}: {'ok' if c.get('ok') else 'FAILED'} {_brief(c)}")
    report = reports[0] if len(reports) == 1 else _merge("all", reports)
    out = args.output or Path(f"{args.subcommand}_report.{args.format}")
    try:
        emit_report(report, out, args.format)
    except OSError as e:
        print(f"wavebilinear: output error: {e}", file=sys.stderr)
        return 2
    print(f"report written to {out}")
    return 0 if all(r.passed for r in reports) else 1


def _brief(c: dict) -> str:
    keep = {k: v for k, v in c.items() if k != "ok" and not isinstance(v, (dict, list))}
    return " ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in keep.items())


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
