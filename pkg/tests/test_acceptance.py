"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints at the
end of the run (see ``conftest.pytest_terminal_summary``).
"""

import math

import numpy as np
import pytest
import shapely.geometry as sg

from pqcap import cli
from pqcap import polytope2d as p2d
from pqcap.acpf import solve_pf
from pqcap.capability import (branch_polygon_rows, build_gsk, compute_capability, dispatch,
                              reduced_demand)
from pqcap.cases import BUNDLED, load_bundled
from pqcap.lintdf import build_tdfs, eval_voltages
from pqcap.polytope2d import Halfspace, HalfspaceSet
from pqcap.scanner import ScanConfig, benchmark, compute_metrics, scan

from conftest import make_two_bus

C1 = "C1 analytic TDF"
C2 = "C2 linearization convergence"
C3 = "C3 polytope oracle equivalence"
C4 = "C4 octagon geometry"
C5 = "C5 accuracy on desk cases"
C6 = "C6 conservatism"
C7 = "C7 complexity ordering"
C8 = "C8 metric identities"
C9 = "C9 determinism"


# -- 1 ----------------------------------------------------------------------

@pytest.mark.parametrize("r, x", [(0.0, 0.1), (0.05, 0.1), (0.3, 0.1), (0.02, 0.5), (1.0, 0.2)])
def test_c1_analytic_tdf(acceptance, r, x):
    tdf = build_tdfs(make_two_bus(r=r, x=x))
    y = 1 / complex(r, x)
    g, b = y.real, y.imag
    den = g * g + b * b
    expect = np.array([[-b, -g], [g, -b]]) / den
    err = float(np.abs(tdf.tdf - expect).max())
    acceptance(C1, err <= 1e-9, f"r={r}, x={x}: max abs deviation {err:.1e} (tol 1e-9)")
    assert err <= 1e-9


def test_c1_bundled_two_bus(acceptance):
    case = load_bundled("two_bus")
    br = case.branches[0]
    y = 1 / complex(br.r_s, br.x_s)
    g, b = y.real, y.imag
    expect = np.array([[-b, -g], [g, -b]]) / (g * g + b * b)
    err = float(np.abs(build_tdfs(case).tdf - expect).max())
    acceptance(C1, err <= 1e-9, f"bundled two_bus: max abs deviation {err:.1e} (tol 1e-9)")
    assert err <= 1e-9


# -- 2 ----------------------------------------------------------------------

def _patterns(case):
    """Unit-magnitude injection directions: demand-shaped and shift-key-shaped."""
    m = case.n_buses - 1
    p_d, q_d = reduced_demand(case)
    load = -np.concatenate([p_d if p_d.any() else np.ones(m), q_d if q_d.any() else np.ones(m)])
    gsk = build_gsk(case.generators, case)
    gen = gsk.T @ np.array([1.0, 1.0])
    return [v / np.abs(v).sum() for v in (load, gen)]


@pytest.mark.parametrize("name", BUNDLED)
def test_c2_linearization_convergence(acceptance, name):
    case = load_bundled(name)
    tdf = build_tdfs(case)
    m = case.n_buses - 1
    worst = 0.0
    for pattern in _patterns(case):
        errs = []
        for k in range(6):
            u = 0.1 / 2**k
            p, q = u * pattern[:m], u * pattern[m:]
            _, v_lin = eval_voltages(tdf, p, q)
            sol = solve_pf(case, p, q)
            assert sol.converged
            errs.append(float(np.abs(v_lin - sol.v).max()))
        ratios = np.array(errs[1:]) / np.array(errs[:-1])
        worst = max(worst, float(ratios.max()))
    ok = worst <= 0.35
    acceptance(C2, ok, f"{name}: worst err(u/2)/err(u) = {worst:.3f} for u in 0.1/2^k (<=0.35)")
    assert ok


# -- 3 ----------------------------------------------------------------------

def _random_halfspace_sets(rng, count):
    for _ in range(count):
        n = rng.integers(3, 20)
        ang = rng.uniform(0, 2 * np.pi, n)
        c = rng.normal(size=2)
        rhs = rng.uniform(0.2, 2.0, n) + np.cos(ang) * c[0] + np.sin(ang) * c[1]
        yield HalfspaceSet(tuple(Halfspace(math.cos(a), math.sin(a), float(r))
                                 for a, r in zip(ang, rhs))), (-5.0, 5.0, -5.0, 5.0)


def _bundled_sets():
    for name in BUNDLED:
        res = compute_capability(load_bundled(name))
        fam = res.families
        yield fam["generator"] + fam["voltage"] + fam["branch"], res.bbox


def _membership_disagreements(hs, bbox, rng, n=10_000):
    poly = p2d.polygon_from_halfspaces(hs, bbox)
    p_lo, p_hi, q_lo, q_hi = bbox
    pts = np.column_stack([rng.uniform(p_lo, p_hi, n), rng.uniform(q_lo, q_hi, n)])
    if len(poly) >= 3:
        # concentrate half the samples around the region itself
        a = poly.as_array()
        lo, hi = a.min(axis=0), a.max(axis=0)
        pad = 0.05 * (hi - lo) + 1e-6
        pts[: n // 2] = rng.uniform(lo - pad, hi + pad, size=(n // 2, 2))
    shape = sg.Polygon(poly.vertices) if len(poly) >= 3 else None
    bad = 0
    for pt in pts:
        mine = p2d.contains(hs, tuple(pt), 1e-9)
        if shape is None:
            ref = False
            near = len(poly) > 0 and min(math.dist(pt, v) for v in poly.vertices) <= 1e-6
        else:
            spt = sg.Point(pt)
            ref = shape.contains(spt)
            near = shape.exterior.distance(spt) <= 1e-9 * max(1.0, float(np.abs(pt).max()))
        if mine != ref and not near:
            bad += 1
    return bad


def test_c3_membership(acceptance):
    rng = np.random.default_rng(20240501)
    total = 0
    n_sets = 0
    for hs, bbox in list(_bundled_sets()) + list(_random_halfspace_sets(rng, 6)):
        total += _membership_disagreements(hs, bbox, rng)
        n_sets += 1
    acceptance(C3, total == 0, f"{total} membership disagreements, {n_sets} cases x 10^4 points")
    assert total == 0


def test_c3_area_identities(acceptance):
    rng = np.random.default_rng(7)
    polys = [p2d.convex_hull(map(tuple, rng.normal(size=(rng.integers(3, 30), 2)) + rng.normal(size=2)))
             for _ in range(100)]
    failures = 0
    for k, a in enumerate(polys):
        b = polys[(k + 1) % len(polys)]
        aa = p2d.intersect(a, a)
        same = (p2d.area(aa) == pytest.approx(p2d.area(a), rel=1e-9)
                and len(aa) == len(a)
                and np.allclose(sorted(aa.vertices), sorted(a.vertices), atol=1e-9))
        ab = p2d.area(p2d.intersect(a, b))
        mono = ab <= min(p2d.area(a), p2d.area(b)) + 1e-12
        ref = sg.Polygon(a.vertices).intersection(sg.Polygon(b.vertices)).area
        failures += (not same) + (not mono) + (abs(ab - ref) > 1e-9 * max(ref, 1.0))
    acceptance(C3, failures == 0, f"{failures} identity failures on 100 random polygons")
    assert failures == 0


# -- 4 ----------------------------------------------------------------------

def test_c4_octagon(acceptance):
    ratings = [1.0, 0.25, 15.0 / 10.0, 3.7e-3]
    approx = branch_polygon_rows(8, ratings)
    worst_v = worst_m = 0.0
    for s in ratings:
        hs = HalfspaceSet(tuple(Halfspace(a, b, s) for a, b in approx.coef))
        pts = p2d.polygon_from_halfspaces(hs, (-2 * s, 2 * s, -2 * s, 2 * s), tol=1e-12 * s)
        arr = pts.as_array()
        assert len(arr) == 8
        mids = 0.5 * (arr + np.roll(arr, -1, axis=0))
        worst_v = max(worst_v, float(np.abs(np.hypot(*arr.T) - s).max()))
        worst_m = max(worst_m, float(np.abs(np.hypot(*mids.T) - s * math.cos(math.pi / 8)).max()))
    ok = worst_v <= 1e-9 and worst_m <= 1e-9 and math.cos(math.pi / 8) == pytest.approx(0.92388, abs=1e-5)
    acceptance(C4, ok, f"vertex radius err {worst_v:.1e}, midpoint err {worst_m:.1e}")
    assert ok


# -- 5 ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def lv_validation():
    case = load_bundled("lv_radial")
    cap = compute_capability(case)
    return case, cap, scan(case, config=ScanConfig(), capability=cap)


@pytest.fixture(scope="module")
def mv_validation():
    case = load_bundled("mv_trafo")
    cap = compute_capability(case)
    return case, cap, scan(case, config=ScanConfig(), capability=cap)


def test_c5_lv(acceptance, lv_validation):
    case, _, res = lv_validation
    r_over_x = [br.r_s / br.x_s for br in case.branches[1:]]
    assert 10 <= case.n_buses <= 20 and min(r_over_x) >= 1
    m = res.metrics
    ok = m.error <= 0.05 and m.fill_factor >= 0.80
    acceptance(C5, ok, f"LV error {100 * m.error:.2f}% (<=5%), fill {100 * m.fill_factor:.1f}% (>=80%)")
    assert ok


def test_c5_mv(acceptance, mv_validation):
    case, _, res = mv_validation
    assert case.branches[0].x_s / case.branches[0].r_s > 10  # transformer feeder
    m = res.metrics
    dp, dq = np.subtract(res.resulting.centroid(), res.admissible.centroid())
    ok = m.error <= 0.10 and abs(dq) > abs(dp)
    acceptance(C5, ok, f"MV error {100 * m.error:.2f}% (<=10%), resulting-area shift "
                       f"dP={dp:+.3f} dQ={dq:+.3f} p.u.")
    assert ok


# -- 6 ----------------------------------------------------------------------

def test_c6_conservatism(acceptance):
    case = load_bundled("lv_radial")
    cap = compute_capability(case)
    gsk = build_gsk(case.generators, case)
    p_d, q_d = reduced_demand(case)
    v_min, v_max = case.v_limits()
    worst_v = worst_s = 0.0
    converged = True
    for P, Q in p2d.scale(cap.polygon, 0.95).vertices:
        p, q = dispatch(gsk, P, Q, p_d, q_d)
        sol = solve_pf(case, p, q)
        converged &= sol.converged
        worst_v = max(worst_v, float(np.max(sol.v - v_max)), float(np.max(v_min - sol.v)))
        for i, br in enumerate(case.branches):
            if br.s_rating > 0:
                s = max(math.hypot(sol.p_f[i], sol.q_f[i]), math.hypot(sol.p_t[i], sol.q_t[i]))
                worst_s = max(worst_s, s / br.s_rating - 1.0)
    ok = converged and worst_v <= 0.005 and worst_s <= 0.01
    acceptance(C6, ok, f"{len(cap.polygon)} vertices: worst voltage excess {max(worst_v, 0):.4f} pu "
                       f"(<=0.005), worst rating excess {100 * max(worst_s, 0):.2f}% (<=1%)")
    assert ok


# -- 7 ----------------------------------------------------------------------

@pytest.mark.slow
def test_c7_complexity(acceptance):
    case = load_bundled("radial_120")
    assert case.n_buses >= 100
    rec = benchmark(case, config=ScanConfig(workers=1))
    ok = rec.ratio >= 10
    acceptance(C7, ok, f"{case.n_buses} buses: t_poly {rec.t_poly:.3f} s, t_scan {rec.t_scan:.1f} s, "
                       f"ratio {rec.ratio:.0f} (>=10)")
    assert ok


# -- 8 ----------------------------------------------------------------------

def test_c8_metric_identities(acceptance):
    sq = p2d.ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
    shifted = p2d.ConvexPolygon(((0.5, 0.0), (1.5, 0.0), (1.5, 1.0), (0.5, 1.0)))
    same = compute_metrics(sq, sq)
    half = compute_metrics(sq, shifted)
    ok = (abs(same.error) <= 1e-12 and abs(same.fill_factor - 1) <= 1e-12
          and abs(half.error - 0.5) <= 1e-12 and abs(half.fill_factor - 0.5) <= 1e-12)
    acceptance(C8, ok, f"identical {same.error:g}/{same.fill_factor:g}, "
                       f"half overlap {half.error:g}/{half.fill_factor:g}")
    assert ok


# -- 9 ----------------------------------------------------------------------

def test_c9_determinism(acceptance, tmp_path):
    outputs = []
    for run in ("a", "b"):
        code = cli.main(["validate", "lv_radial", "--workers", "1", "-o", str(tmp_path / run)])
        assert code == 0
        outputs.append((tmp_path / run / "lv_radial.validation.json").read_bytes())
    ok = outputs[0] == outputs[1]
    acceptance(C9, ok, f"two validate runs, {len(outputs[0])} bytes each, identical={ok}")
    assert ok
