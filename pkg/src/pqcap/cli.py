"""Command-line entry point.

Exit codes: 0 success (an empty capability polygon included), 1 input
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import polytope2d as p2d
from . import reports
from .capability import CapabilityOptions, GskError, compute_capability
from .cases import BUNDLED, load_bundled
from .lintdf import SingularSystemError, build_tdfs, tdf_tables
from .netmodel import FORMATS, CaseError, NetworkCase, load_case
from .scanner import BenchRecord, ScanConfig, ScanError, benchmark, scan

logger = logging.getLogger("pqcap")

OUTPUT_ENV = "PQCAP_OUTPUT_DIR"
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    cases: list[str]
    format: str | None = None
    n_sides: int = 8
    n_p_samples: int = 100
    q_tol: float = 1e-4
    workers: int = 1
    branch_offset: bool = True
    output_dir: Path = field(default_factory=lambda: Path(os.environ.get(OUTPUT_ENV, "pqcap-out")))
    export: set[str] = field(default_factory=lambda: {"json"})

    def __post_init__(self):
        if self.n_sides < 4 or self.n_sides % 2:
            raise InputError(f"--n-sides must be an even integer >= 4, got {self.n_sides}")
        if self.n_p_samples < 2:
            raise InputError(f"--n-p-samples must be >= 2, got {self.n_p_samples}")
        if self.q_tol <= 0:
            raise InputError("--q-tol must be positive")
        if self.workers < 1:
            raise InputError("--workers must be >= 1")
        if self.format is not None and self.format not in FORMATS:
            raise InputError(f"unknown format {self.format!r}")

    @property
    def capability_options(self) -> CapabilityOptions:
        return CapabilityOptions(n_sides=self.n_sides, branch_offset=self.branch_offset)

    @property
    def scan_config(self) -> ScanConfig:
        return ScanConfig(n_p_samples=self.n_p_samples, q_tol=self.q_tol, workers=self.workers)


def resolve_case(spec: str, format: str | None = None) -> NetworkCase:
    """A case-file path, or the name of a bundled case."""
    path = Path(spec)
    if path.exists():
        try:
            return load_case(path, format)
        except OSError as exc:
            raise InputError(f"{spec}: {exc}") from exc
    name = spec.removeprefix("bundled:")
    if name in BUNDLED:
        return load_bundled(name)
    raise InputError(f"{spec}: no such file or bundled case (bundled: {', '.join(BUNDLED)})")


def _write(cfg: RunConfig, name: str, data) -> Path:
    path = reports.atomic_write(cfg.output_dir / name, data)
    logger.info("wrote %s", path)
    return path


def cmd_compute(cfg: RunConfig) -> int:
    from .plotting import composition_figure

    case = resolve_case(cfg.cases[0], cfg.format)
    result = compute_capability(case, cfg.capability_options)
    doc = reports.capability_report(case, result, cfg.n_sides)
    stem = case.name or "case"
    _write(cfg, f"{stem}.capability.json", reports.dumps(doc))
    if "csv" in cfg.export:
        _write(cfg, f"{stem}.polygon.csv", p2d.to_csv(result.polygon))
        for name, text in tdf_tables(build_tdfs(case, with_offset=cfg.branch_offset)).items():
            _write(cfg, f"{stem}.{name}.csv", text)
    if "svg" in cfg.export:
        _write(cfg, f"{stem}.composition.svg",
               composition_figure(result, f"{stem}: PQ capability", case.base_mva))
    if result.is_empty:
        print(f"{stem}: empty capability polygon ({'; '.join(result.diagnostics)})")
    else:
        print(f"{stem}: {len(result.polygon)} vertices, area {p2d.area(result.polygon):.6g} p.u.^2, "
              f"{len(result.halfspaces)} binding constraints")
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    from .plotting import validation_figure

    case = resolve_case(cfg.cases[0], cfg.format)
    result = compute_capability(case, cfg.capability_options)
    res = scan(case, config=cfg.scan_config, capability=result)
    stem = case.name or "case"
    doc = reports.validation_report(case, result, res, cfg.n_sides)
    _write(cfg, f"{stem}.validation.json", reports.dumps(doc))
    _write(cfg, f"{stem}.timings.json", reports.dumps(
        {"polyhedral_seconds": result.seconds, "scan_seconds": res.scan_seconds}))
    if "csv" in cfg.export:
        _write(cfg, f"{stem}.samples.csv", reports.samples_csv(res))
    if "svg" in cfg.export:
        _write(cfg, f"{stem}.validation.svg",
               validation_figure(result, res, f"{stem}: polyhedral vs. AC", case.base_mva))
    m = res.metrics
    fmt = lambda x: "undefined" if x is None else f"{100 * x:.2f}%"  # noqa: E731
    print(f"{stem}: error {fmt(m.error)}, fill factor {fmt(m.fill_factor)}, "
          f"polyhedral {result.seconds:.3g} s, scan {res.scan_seconds:.3g} s")
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    from .plotting import complexity_figure

    if len(cfg.cases) < 2:
        raise InputError("need >=2 cases for regression")
    records = []
    for spec in cfg.cases:
        try:
            case = resolve_case(spec, cfg.format)
            rec = benchmark(case, cfg.capability_options, cfg.scan_config)
        except (InputError, CaseError, ScanError, GskError, np.linalg.LinAlgError) as exc:
            logger.error("%s: %s", spec, exc)
            rec = BenchRecord(Path(spec).stem, 0, float("nan"), float("nan"), str(exc))
        records.append(rec)
        print(f"{rec.name}: {rec.n_buses} buses, polyhedral {rec.t_poly:.3g} s, "
              f"scan {rec.t_scan:.3g} s")
    _write(cfg, "bench.csv", reports.bench_csv(records))
    ok = [r for r in records if not r.error]
    if len(ok) >= 2:
        n = [r.n_buses for r in ok]
        s_poly, _ = reports.semilog_regression(n, [r.t_poly for r in ok])
        s_scan, _ = reports.semilog_regression(n, [r.t_scan for r in ok])
        print(f"semi-log slopes per bus: polyhedral {s_poly:.3g}, scan {s_scan:.3g}")
    if "svg" in cfg.export:
        _write(cfg, "bench.svg", complexity_figure(records))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pqcap",
                     description="Polyhedral PQ capability areas of distribution grids.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, many=False):
        p.add_argument("cases", nargs="+" if many else 1, metavar="CASE",
                       help="case file path or bundled case name")
        p.add_argument("--format", choices=FORMATS, help="case-file format (default: by suffix)")
        p.add_argument("--n-sides", type=int, default=8, help="sides of the rating polygon")
        p.add_argument("--no-branch-offset", dest="branch_offset", action="store_false",
                       help="drop the constant charging term from linearized branch flows")
        p.add_argument("-o", "--out", type=Path, default=None,
                       help=f"output directory (default: ${OUTPUT_ENV} or ./pqcap-out)")
        p.add_argument("--svg", action="store_true", help="also write SVG figures")
        p.add_argument("--csv", action="store_true", help="also write CSV tables")
        p.add_argument("-v", "--verbose", action="store_true")

    def scanning(p):
        p.add_argument("--n-p-samples", type=int, default=100)
        p.add_argument("--q-tol", type=float, default=1e-4, help="bisection tolerance on Q (p.u.)")
        p.add_argument("--workers", type=int, default=1, help="concurrent P samples")

    common(sub.add_parser("compute", help="polyhedral PQ capability area"))
    p = sub.add_parser("validate", help="compare against the AC power-flow oracle")
    common(p)
    scanning(p)
    p = sub.add_parser("bench", help="time polyhedral pipeline against the oracle scan")
    common(p, many=True)
    scanning(p)
    return parser


def config_from_args(args) -> RunConfig:
    export = {"json"} | ({"svg"} if args.svg else set()) | ({"csv"} if args.csv else set())
    kw = dict(cases=list(args.cases), format=args.format, n_sides=args.n_sides,
              branch_offset=args.branch_offset, export=export)
    if args.out is not None:
        kw["output_dir"] = args.out
    if hasattr(args, "n_p_samples"):
        kw.update(n_p_samples=args.n_p_samples, q_tol=args.q_tol, workers=args.workers)
    return RunConfig(**kw)


COMMANDS = {"compute": cmd_compute, "validate": cmd_validate, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except (InputError, CaseError, GskError) as exc:
        print(f"pqcap: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularSystemError, ScanError, np.linalg.LinAlgError) as exc:
        print(f"pqcap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
