"""Report assembly and atomic file output."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from . import polytope2d as p2d
from .capability import CapabilityResult
from .netmodel import NetworkCase
from .scanner import BenchRecord, ScanResult


def atomic_write(path, data: str | bytes) -> Path:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def case_summary(case: NetworkCase) -> dict:
    return {
        "name": case.name,
        "n_buses": case.n_buses,
        "n_branches": len(case.in_service),
        "n_generators": len(case.generators),
        "base_mva": case.base_mva,
    }


def capability_report(case: NetworkCase, result: CapabilityResult, n_sides: int) -> dict:
    doc = {"case": case_summary(case), "n_sides": n_sides}
    doc.update(result.to_dict())
    return doc


def validation_report(case: NetworkCase, result: CapabilityResult, scan: ScanResult,
                      n_sides: int) -> dict:
    """Combined polyhedral/oracle report; wall-clock timings are kept out."""
    m = scan.metrics
    doc = {
        "case": case_summary(case),
        "n_sides": n_sides,
        "polygon": [list(v) for v in result.polygon.vertices],
        "polygon_area": p2d.area(result.polygon),
        "error": None if m is None else m.error,
        "fill_factor": None if m is None else m.fill_factor,
        "diagnostics": list(result.diagnostics),
    }
    doc.update(scan.to_dict(timings=False))
    return doc


def samples_csv(scan: ScanResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "feasible", "q_min", "q_max", "feeder_p_lo", "feeder_q_lo",
                     "feeder_p_hi", "feeder_q_hi"])
    for s in scan.samples:
        writer.writerow([s.p, int(s.feasible), s.q_min, s.q_max, s.feeder_p_lo,
                         s.feeder_q_lo, s.feeder_p_hi, s.feeder_q_hi])
    return buf.getvalue()


def bench_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["case", "n_buses", "t_poly_s", "t_scan_s", "error"])
    for r in records:
        writer.writerow([r.name, r.n_buses, f"{r.t_poly:.6g}", f"{r.t_scan:.6g}", r.error])
    return buf.getvalue()


def semilog_regression(n_buses, seconds) -> tuple[float, float]:
    """Least-squares fit ``log10(t) = intercept + slope * n``; returns (slope, intercept)."""
    n = np.asarray(n_buses, dtype=float)
    t = np.asarray(seconds, dtype=float)
    if len(n) < 2:
        raise ValueError("need >=2 cases for regression")
    slope, intercept = np.polyfit(n, np.log10(t), 1)
    return float(slope), float(intercept)
