"""Polyhedral PQ capability area of a distribution feeder.

Nodal injections are tied to the aggregated generator setpoint ``(P, Q)``
through generation shift keys. Generator, voltage and branch-flow limits
then become half-planes in the (P, Q) plane, and their intersection is the
capability polygon.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import polytope2d as p2d
from .admittance import AdmittanceSet, build_matrices
from .lintdf import TdfSet, build_tdfs
from .netmodel import Generator, NetworkCase
from .polytope2d import BBox, ConvexPolygon, Halfspace, HalfspaceSet, Tag

ZERO_ROW = 1e-12


class GskError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GskMapping:
    gsk_p: np.ndarray
    gsk_q: np.ndarray
    C_g: np.ndarray | None = None
    T: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class PolygonApprox:
    """Inscribed regular n-gon of the apparent-power disc of each rated branch.

    Row ``k`` reads ``coef[k, 0]*p_f + coef[k, 1]*q_f <= s``; the realized
    polygon has its vertices on the circle of radius ``s``.
    """

    n_sides: int
    coef: np.ndarray  # (n_sides, 2)
    ratings: np.ndarray  # per in-service branch, 0 = unlimited

    @property
    def a_q(self) -> float:
        return math.tan(math.pi / self.n_sides)

    @property
    def rated(self) -> np.ndarray:
        return np.flatnonzero(self.ratings > 0)

    def vertices(self, s: float = 1.0) -> np.ndarray:
        """Corners of the realized polygon for rating ``s``."""
        n = self.n_sides
        ang = 2 * np.pi * np.arange(n) / n
        return s * np.column_stack([np.cos(ang), np.sin(ang)])


@dataclass(frozen=True, eq=False)
class CapabilityOptions:
    n_sides: int = 8
    bbox_inflation: float = 0.1
    branch_offset: bool = True
    tol: float = p2d.TOL


@dataclass(frozen=True, eq=False)
class CapabilityResult:
    polygon: ConvexPolygon
    halfspaces: HalfspaceSet
    families: dict[str, HalfspaceSet]
    bbox: BBox
    diagnostics: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def is_empty(self) -> bool:
        return self.polygon.is_empty

    def family_region(self, family: str) -> ConvexPolygon:
        return p2d.polygon_from_halfspaces(self.families[family], self.bbox)

    def to_dict(self) -> dict:
        return {
            "polygon": [list(v) for v in self.polygon.vertices],
            "area": p2d.area(self.polygon),
            "empty": self.polygon.is_empty,
            "halfspaces": [h.to_dict() for h in self.halfspaces],
            "n_constraints": {k: len(v) for k, v in self.families.items()},
            "bbox": list(self.bbox),
            "diagnostics": list(self.diagnostics),
        }


# ---------------------------------------------------------------------------
# aggregation mapping
# ---------------------------------------------------------------------------


def _keys(cap: np.ndarray, what: str) -> np.ndarray:
    if np.any(cap < 0):
        raise GskError(f"negative {what} capability gives negative shift keys")
    total = cap.sum()
    if total == 0:
        raise GskError(f"all-zero {what} capability; shift keys undefined")
    return cap / total


def build_gsk(gens: Sequence[Generator], case: NetworkCase | None = None) -> GskMapping:
    """Shift keys proportional to each generator's maximum capability.

    With ``case`` given, also assembles the generator incidence ``C_g``
    over the non-slack buses and the mapping ``T``.
    """
    gsk_p = _keys(np.array([g.p_max for g in gens], dtype=float), "active")
    gsk_q = _keys(np.array([g.q_max for g in gens], dtype=float), "reactive")
    if case is None:
        return GskMapping(gsk_p, gsk_q)
    slack = case.slack_index
    pos = {}
    for k, bus in enumerate(case.buses):
        if k != slack:
            pos[bus.id] = k - (k > slack)
    C_g = np.zeros((case.n_buses - 1, len(gens)))
    for j, g in enumerate(gens):
        if g.bus in pos:
            C_g[pos[g.bus], j] = 1.0
    m = case.n_buses - 1
    T = np.zeros((2 * m, 2))
    T[:m, 0] = C_g @ gsk_p
    T[m:, 1] = C_g @ gsk_q
    return GskMapping(gsk_p, gsk_q, C_g, T)


def reduced_demand(case: NetworkCase) -> tuple[np.ndarray, np.ndarray]:
    p_d, q_d = case.demand()
    s = case.slack_index
    return np.delete(p_d, s), np.delete(q_d, s)


def dispatch(gsk: GskMapping, P: float, Q: float, p_d, q_d) -> tuple[np.ndarray, np.ndarray]:
    """Non-slack nodal injections for aggregated setpoint ``(P, Q)``."""
    x = gsk.T @ np.array([P, Q]) - np.concatenate([p_d, q_d])
    m = len(p_d)
    return x[:m], x[m:]


# ---------------------------------------------------------------------------
# constraint families
# ---------------------------------------------------------------------------


def _rows(A: np.ndarray, b: np.ndarray, tags: list[Tag], diags: list[str],
          tol: float = p2d.TOL) -> HalfspaceSet:
    """Turn ``A x <= b`` into half-planes, resolving rows with zero normal."""
    out = []
    infeasible = False
    scale = max(float(np.abs(A).max(initial=0.0)), 1.0)
    for (a_p, a_q), rhs, tag in zip(A, b, tags):
        if math.hypot(a_p, a_q) <= ZERO_ROW * scale:
            if rhs < -tol:
                infeasible = True
                diags.append(f"{tag.label}: violated independently of (P, Q) by {-rhs:.3g}")
            continue
        out.append(Halfspace(float(a_p), float(a_q), float(rhs), tag))
    return HalfspaceSet(tuple(out), infeasible)


def generator_box(gens: Sequence[Generator]) -> HalfspaceSet:
    p_lo = float(sum(g.p_min for g in gens))
    p_hi = float(sum(g.p_max for g in gens))
    q_lo = float(sum(g.q_min for g in gens))
    q_hi = float(sum(g.q_max for g in gens))
    return HalfspaceSet((
        Halfspace(1.0, 0.0, p_hi, Tag("generator", 0, "P <= sum p_max")),
        Halfspace(0.0, 1.0, q_hi, Tag("generator", 1, "Q <= sum q_max")),
        Halfspace(-1.0, 0.0, -p_lo, Tag("generator", 2, "P >= sum p_min")),
        Halfspace(0.0, -1.0, -q_lo, Tag("generator", 3, "Q >= sum q_min")),
    ))


def generator_bbox(gens: Sequence[Generator]) -> BBox:
    return (float(sum(g.p_min for g in gens)), float(sum(g.p_max for g in gens)),
            float(sum(g.q_min for g in gens)), float(sum(g.q_max for g in gens)))


def voltage_halfspaces(tdf: TdfSet, gsk: GskMapping, p_d, q_d, v_min, v_max, v0: float,
                       bus_ids: Sequence[int] | None = None,
                       diags: list[str] | None = None) -> HalfspaceSet:
    """Upper and lower voltage-magnitude limits at every non-slack bus.

    ``p_d, q_d, v_min, v_max`` are indexed over the non-slack buses.
    """
    m = tdf.n_buses - 1
    d = np.concatenate([np.asarray(p_d, float), np.asarray(q_d, float)])
    v_min = np.broadcast_to(np.asarray(v_min, float), (m,))
    v_max = np.broadcast_to(np.asarray(v_max, float), (m,))
    if gsk.T is None or gsk.T.shape[0] != 2 * m or d.shape != (2 * m,):
        raise ValueError("dimension mismatch between TDFs, mapping and demand")
    VT = tdf.v_tdf @ gsk.T
    shift = tdf.v_tdf @ d
    ids = list(range(m)) if bus_ids is None else list(bus_ids)
    A = np.vstack([VT, -VT])
    b = np.concatenate([v_max - v0 + shift, -v_min + v0 - shift])
    tags = [Tag("voltage", k, f"v_max bus {ids[k]}") for k in range(m)]
    tags += [Tag("voltage", k, f"v_min bus {ids[k]}") for k in range(m)]
    return _rows(A, b, tags, [] if diags is None else diags)


def branch_polygon_rows(n_sides: int, s_ratings) -> PolygonApprox:
    if n_sides < 4 or n_sides % 2:
        raise ValueError(f"n_sides must be an even integer >= 4, got {n_sides}")
    ratings = np.asarray(s_ratings, dtype=float)
    if np.any(ratings < 0):
        raise ValueError("ratings must be non-negative")
    alpha = (2 * np.arange(n_sides) + 1) * np.pi / n_sides
    coef = np.column_stack([np.cos(alpha), np.sin(alpha)]) / math.cos(math.pi / n_sides)
    return PolygonApprox(n_sides, coef, ratings)


def branch_halfspaces(tdf: TdfSet, gsk: GskMapping, p_d, q_d, approx: PolygonApprox,
                      branch_ids: Sequence[int] | None = None,
                      diags: list[str] | None = None) -> HalfspaceSet:
    """Polygonal apparent-power limits on the from-end flow of rated branches."""
    n_l = tdf.n_branches
    m = tdf.n_buses - 1
    d = np.concatenate([np.asarray(p_d, float), np.asarray(q_d, float)])
    if len(approx.ratings) != n_l or gsk.T is None or gsk.T.shape[0] != 2 * m \
            or d.shape != (2 * m,):
        raise ValueError("dimension mismatch between TDFs, ratings, mapping and demand")
    ids = list(range(n_l)) if branch_ids is None else list(branch_ids)
    rated = approx.rated
    if len(rated) == 0:
        return HalfspaceSet()
    ptdf, off = tdf.ptdf, tdf.branch_offset
    # (n_rated * n_sides, 2m) rows of B @ PTDF
    c_p, c_q = approx.coef[:, 0], approx.coef[:, 1]
    BP = (c_p[None, :, None] * ptdf[rated][:, None, :]
          + c_q[None, :, None] * ptdf[n_l + rated][:, None, :]).reshape(-1, 2 * m)
    Boff = (c_p[None, :] * off[rated][:, None] + c_q[None, :] * off[n_l + rated][:, None]).ravel()
    S = np.repeat(approx.ratings[rated], approx.n_sides)
    A = BP @ gsk.T
    b = S + BP @ d - Boff
    tags = [Tag("branch", ids[i], f"branch {ids[i]} side {k}")
            for i in rated for k in range(approx.n_sides)]
    return _rows(A, b, tags, [] if diags is None else diags)


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------


def capability_polygon(case: NetworkCase, tdf: TdfSet, gsk: GskMapping,
                       options: CapabilityOptions | None = None,
                       adm: AdmittanceSet | None = None) -> CapabilityResult:
    """Intersect generator, voltage and branch families into the PQ polygon."""
    opts = options or CapabilityOptions()
    adm = build_matrices(case) if adm is None else adm
    diags: list[str] = []
    slack = case.slack_index
    p_d, q_d = reduced_demand(case)
    v_min, v_max = case.v_limits()
    ns = [k for k in range(case.n_buses) if k != slack]
    gen = generator_box(case.generators)
    volt = voltage_halfspaces(tdf, gsk, p_d, q_d, v_min[ns], v_max[ns], tdf.v0,
                              bus_ids=[case.buses[k].id for k in ns], diags=diags)
    ratings = [case.branches[k].s_rating for k in adm.branch_index]
    approx = branch_polygon_rows(opts.n_sides, ratings)
    branch = branch_halfspaces(tdf, gsk, p_d, q_d, approx,
                               branch_ids=list(adm.branch_index), diags=diags)
    families = {"generator": gen, "voltage": volt, "branch": branch}
    bbox = p2d.inflate_bbox(generator_bbox(case.generators), opts.bbox_inflation)
    everything = gen + volt + branch
    poly = p2d.polygon_from_halfspaces(everything, bbox, opts.tol)
    minimal = p2d.minimal_representation(everything, bbox, opts.tol)
    if poly.is_empty:
        diags.append("empty capability polygon: no feasible aggregated setpoint")
    return CapabilityResult(poly, minimal, families, bbox, diags)


def compute_capability(case: NetworkCase, options: CapabilityOptions | None = None) -> CapabilityResult:
    """Full polyhedral pipeline from a case, timed end to end."""
    opts = options or CapabilityOptions()
    t0 = time.perf_counter()
    adm = build_matrices(case)
    tdf = build_tdfs(case, adm, with_offset=opts.branch_offset)
    if case.generators:
        gsk = build_gsk(case.generators, case)
        res = capability_polygon(case, tdf, gsk, opts, adm)
    else:
        bbox = p2d.inflate_bbox((0.0, 0.0, 0.0, 0.0), opts.bbox_inflation)
        res = CapabilityResult(ConvexPolygon(((0.0, 0.0),)), HalfspaceSet(),
                               {"generator": generator_box(()), "voltage": HalfspaceSet(),
                                "branch": HalfspaceSet()},
                               bbox, ["no generators: capability reduces to the origin"])
    return CapabilityResult(res.polygon, res.halfspaces, res.families, res.bbox,
                            res.diagnostics, time.perf_counter() - t0)
