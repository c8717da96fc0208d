"""AC-oracle sweep of the admissible PQ area, accuracy metrics and timing.

Under shift-key coupling every aggregated setpoint ``(P, Q)`` fixes all
nodal injections, so tracing the extreme feasible ``Q`` at a given ``P`` is
a one-dimensional feasibility search: probe a coarse grid of ``Q`` values,
then bisect the bracket around the outermost feasible probe.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import polytope2d as p2d
from .acpf import MAX_ITER, TOL, PfSolution, check_limits, solve_pf
from .admittance import build_matrices
from .capability import (CapabilityOptions, CapabilityResult, GskMapping, build_gsk,
                         compute_capability, dispatch, generator_bbox, reduced_demand)
from .netmodel import NetworkCase
from .polytope2d import ConvexPolygon

logger = logging.getLogger(__name__)


class ScanError(RuntimeError):
    """The oracle sweep found too few feasible operating points."""


@dataclass(frozen=True)
class ScanConfig:
    n_p_samples: int = 100
    q_tol: float = 1e-4
    n_probe: int = 9
    gen_tol: float = 1e-9
    pf_tol: float = TOL
    max_iter: int = MAX_ITER
    workers: int = 1


@dataclass(frozen=True)
class Sample:
    p: float
    feasible: bool
    q_min: float | None = None
    q_max: float | None = None
    # power reaching the feeder (generation net of losses) at both extremes
    feeder_p_lo: float | None = None
    feeder_q_lo: float | None = None
    feeder_p_hi: float | None = None
    feeder_q_hi: float | None = None
    n_solves: int = 0
    n_nonconverged: int = 0


@dataclass(frozen=True)
class Metrics:
    error: float | None
    fill_factor: float | None
    intersection_area: float
    reference_area: float
    poly_area: float


@dataclass(frozen=True, eq=False)
class ScanResult:
    admissible: ConvexPolygon
    resulting: ConvexPolygon
    samples: tuple[Sample, ...]
    metrics: Metrics | None = None
    metrics_resulting: Metrics | None = None
    polyhedral_seconds: float | None = None
    scan_seconds: float = 0.0

    @property
    def n_traces(self) -> int:
        return 2 * sum(s.feasible for s in self.samples)

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "admissible": [list(v) for v in self.admissible.vertices],
            "resulting": [list(v) for v in self.resulting.vertices],
            "admissible_area": p2d.area(self.admissible),
            "resulting_area": p2d.area(self.resulting),
            "n_samples": len(self.samples),
            "n_feasible": sum(s.feasible for s in self.samples),
            "samples": [asdict(s) for s in self.samples],
            "metrics": None if self.metrics is None else asdict(self.metrics),
            "metrics_resulting": None if self.metrics_resulting is None
            else asdict(self.metrics_resulting),
        }
        if timings:
            out["timings"] = {"polyhedral_seconds": self.polyhedral_seconds,
                              "scan_seconds": self.scan_seconds}
        return out


class Oracle:
    """AC feasibility of an aggregated setpoint under fixed shift keys."""

    def __init__(self, case: NetworkCase, gsk: GskMapping, config: ScanConfig | None = None):
        self.case = case
        self.gsk = gsk
        self.config = config or ScanConfig()
        self.adm = build_matrices(case)
        self.p_d, self.q_d = reduced_demand(case)
        self._p_lo = np.array([g.p_min for g in case.generators])
        self._p_hi = np.array([g.p_max for g in case.generators])
        self._q_lo = np.array([g.q_min for g in case.generators])
        self._q_hi = np.array([g.q_max for g in case.generators])

    def units_ok(self, P: float, Q: float) -> bool:
        tol = self.config.gen_tol
        pg = self.gsk.gsk_p * P
        qg = self.gsk.gsk_q * Q
        return bool(np.all(pg >= self._p_lo - tol) and np.all(pg <= self._p_hi + tol)
                    and np.all(qg >= self._q_lo - tol) and np.all(qg <= self._q_hi + tol))

    def solve(self, P: float, Q: float) -> PfSolution:
        p, q = dispatch(self.gsk, P, Q, self.p_d, self.q_d)
        return solve_pf(self.case, p, q, adm=self.adm, tol=self.config.pf_tol,
                        max_iter=self.config.max_iter)

    def feasible(self, P: float, Q: float) -> tuple[bool, PfSolution | None]:
        if not self.units_ok(P, Q):
            return False, None
        sol = self.solve(P, Q)
        if not sol.converged:
            return False, sol
        return not check_limits(sol, self.case, self.adm), sol

    def feeder_point(self, sol: PfSolution) -> tuple[float, float]:
        """Generation net of network losses, as seen at the feeder."""
        return (-sol.slack_p + float(self.p_d.sum()), -sol.slack_q + float(self.q_d.sum()))


def q_extremes(oracle: Oracle, P: float) -> Sample:
    """Smallest and largest feasible ``Q`` at aggregated active power ``P``."""
    cfg = oracle.config
    _, _, q_lo, q_hi = generator_bbox(oracle.case.generators)
    probes = np.linspace(q_lo, q_hi, cfg.n_probe) if q_hi > q_lo else np.array([q_lo])
    n_solves = 0
    n_bad = 0

    def check(Q):
        nonlocal n_solves, n_bad
        ok, sol = oracle.feasible(P, float(Q))
        if sol is not None:
            n_solves += 1
            n_bad += not sol.converged
        return ok, sol

    results = [check(Q) for Q in probes]
    good = [k for k, (ok, _) in enumerate(results) if ok]
    if not good:
        return Sample(float(P), False, n_solves=n_solves, n_nonconverged=n_bad)

    def bisect(inside: float, outside: float, sol):
        while abs(outside - inside) > cfg.q_tol:
            mid = 0.5 * (inside + outside)
            ok, s = check(mid)
            if ok:
                inside, sol = mid, s
            else:
                outside = mid
        return inside, sol

    k_hi, k_lo = good[-1], good[0]
    if k_hi == len(probes) - 1:
        q_max, sol_hi = float(probes[k_hi]), results[k_hi][1]
    else:
        q_max, sol_hi = bisect(float(probes[k_hi]), float(probes[k_hi + 1]), results[k_hi][1])
    if k_lo == 0:
        q_min, sol_lo = float(probes[0]), results[0][1]
    else:
        q_min, sol_lo = bisect(float(probes[k_lo]), float(probes[k_lo - 1]), results[k_lo][1])
    f_lo = oracle.feeder_point(sol_lo)
    f_hi = oracle.feeder_point(sol_hi)
    return Sample(float(P), True, q_min, q_max, f_lo[0], f_lo[1], f_hi[0], f_hi[1],
                  n_solves, n_bad)


def compute_metrics(admissible: ConvexPolygon, poly: ConvexPolygon) -> Metrics:
    """Error and fill factor of ``poly`` against the reference ``admissible``.

    A zero-area denominator leaves the corresponding metric undefined (None).
    """
    a_ref = p2d.area(admissible)
    a_poly = p2d.area(poly)
    a_int = p2d.area(p2d.intersect(admissible, poly))
    error = None if a_poly <= 0 else min(max(1.0 - a_int / a_poly, 0.0), 1.0)
    fill = None if a_ref <= 0 else min(max(a_int / a_ref, 0.0), 1.0)
    return Metrics(error, fill, a_int, a_ref, a_poly)


def scan(case: NetworkCase, gsk: GskMapping | None = None, n_p_samples: int | None = None,
         config: ScanConfig | None = None,
         capability: CapabilityResult | None = None) -> ScanResult:
    """Trace the admissible and resulting PQ areas with the AC oracle.

    ``P`` runs over ``n_p_samples`` equally spaced values between the summed
    generator minimum and maximum. When ``capability`` is given, metrics of
    its polygon are computed against both traced areas.

    Raises
    ------
    ScanError
        If fewer than three ``P`` samples have any feasible ``Q``.
    """
    cfg = config or ScanConfig()
    if n_p_samples is not None:
        cfg = ScanConfig(**{**asdict(cfg), "n_p_samples": n_p_samples})
    if cfg.n_p_samples < 2:
        raise ValueError("n_p_samples must be >= 2")
    gsk = build_gsk(case.generators, case) if gsk is None else gsk
    oracle = Oracle(case, gsk, cfg)
    p_lo, p_hi, _, _ = generator_bbox(case.generators)
    ps = np.linspace(p_lo, p_hi, cfg.n_p_samples)

    t0 = time.perf_counter()
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            samples = tuple(pool.map(lambda P: q_extremes(oracle, float(P)), ps))
    else:
        samples = tuple(q_extremes(oracle, float(P)) for P in ps)
    elapsed = time.perf_counter() - t0

    good = [s for s in samples if s.feasible]
    logger.info("%s: %d of %d P samples feasible, %d power flows in %.3g s", case.name,
                len(good), len(samples), sum(s.n_solves for s in samples), elapsed)
    if len(good) < 3:
        raise ScanError(f"only {len(good)} of {len(samples)} P samples are AC-feasible")
    admissible = p2d.convex_hull([(s.p, s.q_min) for s in good] + [(s.p, s.q_max) for s in good])
    resulting = p2d.convex_hull([(s.feeder_p_lo, s.feeder_q_lo) for s in good]
                                + [(s.feeder_p_hi, s.feeder_q_hi) for s in good])
    metrics = metrics_res = None
    t_poly = None
    if capability is not None:
        metrics = compute_metrics(admissible, capability.polygon)
        metrics_res = compute_metrics(resulting, capability.polygon)
        t_poly = capability.seconds
    return ScanResult(admissible, resulting, samples, metrics, metrics_res, t_poly, elapsed)


@dataclass(frozen=True)
class BenchRecord:
    name: str
    n_buses: int
    t_poly: float
    t_scan: float
    error: str = ""

    @property
    def ratio(self) -> float:
        return self.t_scan / self.t_poly


def benchmark(case: NetworkCase, options: CapabilityOptions | None = None,
              config: ScanConfig | None = None, repeats: int = 3) -> BenchRecord:
    """Wall-clock seconds of the polyhedral pipeline versus the oracle scan.

    The polyhedral time is the best of ``repeats`` runs; the scan runs once
    with concurrency disabled.
    """
    cfg = config or ScanConfig()
    if cfg.workers != 1:
        cfg = ScanConfig(**{**asdict(cfg), "workers": 1})
    t_poly = min(compute_capability(case, options).seconds for _ in range(max(repeats, 1)))
    t0 = time.perf_counter()
    scan(case, None, config=cfg)
    t_scan = time.perf_counter() - t0
    return BenchRecord(case.name, case.n_buses, t_poly, t_scan)
