import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pqcap import polytope2d as p2d
from pqcap.capability import build_gsk, compute_capability
from pqcap.polytope2d import ConvexPolygon
from pqcap.scanner import (Oracle, ScanConfig, ScanError, benchmark, compute_metrics, q_extremes,
                           scan)

from conftest import make_two_bus


def unit_square(dx=0.0, dy=0.0, s=1.0):
    return ConvexPolygon(((dx, dy), (dx + s, dy), (dx + s, dy + s), (dx, dy + s)))


def test_generator_q_bounds_bind():
    case = make_two_bus(gen=(0.0, 1.0, -0.5, 0.5), v_band=(0.5, 1.5))
    sample = q_extremes(Oracle(case, build_gsk(case.generators, case)), 0.0)
    assert sample.feasible
    assert (sample.q_min, sample.q_max) == (-0.5, 0.5)


def test_voltage_limit_q_max():
    case = make_two_bus(gen=(0.0, 1.0, -2.0, 2.0), v_band=(0.9, 1.1))
    cfg = ScanConfig()
    sample = q_extremes(Oracle(case, build_gsk(case.generators, case), cfg), 0.0)
    # lossless 2-bus at P=0: Q = V1 (V1 - 1) / x, so V1 = 1.1 needs Q = 1.1 exactly
    assert sample.q_max == pytest.approx(1.1, abs=cfg.q_tol)
    assert sample.q_min == pytest.approx(10 * 0.9 * (0.9 - 1.0), abs=cfg.q_tol)
    # the linear model puts the same limit at Q = 1.0
    lin = compute_capability(case).polygon.as_array()[:, 1].max()
    assert lin == pytest.approx(1.0)
    assert abs(sample.q_max - lin) / lin == pytest.approx(0.1, abs=1e-3)


def test_trace_count(lv_case):
    res = scan(lv_case, n_p_samples=100)
    assert len(res.samples) == 100
    assert res.n_traces <= 200
    for s in res.samples:
        if s.feasible:
            assert s.q_min <= s.q_max


def test_admissible_is_hull_of_extremes(lv_case):
    res = scan(lv_case, n_p_samples=12)
    pts = [(s.p, q) for s in res.samples if s.feasible for q in (s.q_min, s.q_max)]
    hull = p2d.convex_hull(pts)
    assert hull == res.admissible
    for pt in pts:
        assert p2d.contains(res.admissible.to_halfspaces(), pt, 1e-9)


def test_brackets_are_genuine(lv_case):
    cfg = ScanConfig()
    gsk = build_gsk(lv_case.generators, lv_case)
    oracle = Oracle(lv_case, gsk, cfg)
    res = scan(lv_case, gsk, n_p_samples=7, config=cfg)
    q_lo = sum(g.q_min for g in lv_case.generators)
    q_hi = sum(g.q_max for g in lv_case.generators)
    step = 0.01 * (q_hi - q_lo)
    checked = 0
    for s in res.samples:
        if not s.feasible or s.q_max - s.q_min < 2 * step:
            continue
        assert oracle.feasible(s.p, s.q_max - step)[0]
        assert oracle.feasible(s.p, s.q_min + step)[0]
        assert not oracle.feasible(s.p, s.q_max + step)[0]
        assert not oracle.feasible(s.p, s.q_min - step)[0]
        checked += 1
    assert checked >= 3


def test_more_samples_never_shrink(lv_case):
    coarse = scan(lv_case, n_p_samples=10)
    fine = scan(lv_case, n_p_samples=19)
    band = 2 * 1e-4 * np.ptp(coarse.admissible.as_array()[:, 0])
    assert p2d.area(fine.admissible) >= p2d.area(coarse.admissible) - band


def test_concurrent_scan_identical(lv_case):
    a = scan(lv_case, n_p_samples=8, config=ScanConfig(workers=1))
    b = scan(lv_case, n_p_samples=8, config=ScanConfig(workers=4))
    assert a.samples == b.samples
    assert a.admissible == b.admissible and a.resulting == b.resulting


def test_resulting_includes_losses():
    case = make_two_bus(r=0.05, gen=(0.0, 1.0, -1.0, 1.0), v_band=(0.8, 1.2))
    res = scan(case, n_p_samples=5)
    for s in res.samples:
        if s.feasible and s.p > 0:
            # power reaching the feeder is generation minus positive losses
            assert s.feeder_p_hi < s.p


def test_scan_error_when_infeasible():
    case = make_two_bus(v_band=(1.2, 1.3))
    with pytest.raises(ScanError):
        scan(case, n_p_samples=5)


def test_scan_rejects_one_sample():
    with pytest.raises(ValueError):
        scan(make_two_bus(), n_p_samples=1)


def test_metrics_examples():
    sq = unit_square()
    m = compute_metrics(sq, sq)
    assert (m.error, m.fill_factor) == (0.0, 1.0)
    m = compute_metrics(sq, unit_square(0.5))
    assert m.error == pytest.approx(0.5, abs=1e-12)
    assert m.fill_factor == pytest.approx(0.5, abs=1e-12)
    m = compute_metrics(unit_square(-1, -1, 3), sq)
    assert m.error == 0.0 and m.fill_factor == pytest.approx(1 / 9)


def test_metrics_undefined_for_zero_area():
    m = compute_metrics(ConvexPolygon(), unit_square())
    assert m.fill_factor is None and m.error == 1.0
    m = compute_metrics(unit_square(), ConvexPolygon(((0.0, 0.0),)))
    assert m.error is None and m.fill_factor == 0.0


@settings(max_examples=60, deadline=None)
@given(dx=st.floats(-1, 1), dy=st.floats(-1, 1), s=st.floats(0.3, 2),
       k=st.floats(1e-3, 1e3))
def test_metrics_scale_invariant(dx, dy, s, k):
    a, b = unit_square(), unit_square(dx, dy, s)
    m1 = compute_metrics(a, b)
    m2 = compute_metrics(p2d.scale(a, k, (0.0, 0.0)), p2d.scale(b, k, (0.0, 0.0)))
    assert 0.0 <= m1.error <= 1.0
    assert m2.error == pytest.approx(m1.error, abs=1e-9)
    assert m2.fill_factor == pytest.approx(m1.fill_factor, abs=1e-9)


def test_benchmark_record(lv_case):
    rec = benchmark(lv_case, config=ScanConfig(n_p_samples=5), repeats=1)
    assert rec.n_buses == lv_case.n_buses
    assert rec.t_poly > 0 and rec.t_scan > 0
    assert rec.t_poly < rec.t_scan


def test_scan_result_dict(lv_case):
    cap = compute_capability(lv_case)
    res = scan(lv_case, n_p_samples=5, capability=cap)
    doc = res.to_dict(timings=False)
    assert "timings" not in doc
    assert doc["n_samples"] == 5
    assert set(doc["metrics"]) == {"error", "fill_factor", "intersection_area",
                                   "reference_area", "poly_area"}
    assert "timings" in res.to_dict()
