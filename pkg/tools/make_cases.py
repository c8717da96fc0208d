"""Regenerate the bundled desk-scale cases under src/pqcap/cases/.

    python tools/make_cases.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "pqcap" / "cases"


def two_bus() -> dict:
    return {
        "name": "two_bus",
        "base_mva": 1.0,
        "buses": [
            {"id": 0, "kind": "slack", "v_min": 0.9, "v_max": 1.1, "v_set": 1.0},
            {"id": 1, "v_min": 0.9, "v_max": 1.1},
        ],
        "branches": [{"from": 0, "to": 1, "r": 0.0, "x": 0.1, "rate_mva": 1.5}],
        "generators": [
            {"bus": 1, "p_min_mw": 0.0, "p_max_mw": 2.0, "q_min_mvar": -2.0, "q_max_mvar": 2.0}
        ],
    }


def lv_radial() -> dict:
    """0.4 kV cable feeder behind a 0.4 MVA transformer, rooftop PV units."""
    base, v_kv, s_tr = 1.0, 0.4, 0.4
    z_base = v_kv**2 / base
    r_km, x_km, seg_km = 0.2, 0.08, 0.05
    load = 0.012
    buses = [{"id": 0, "kind": "slack", "v_min": 0.95, "v_max": 1.05, "v_set": 1.0}]
    for k in range(1, 17):
        pd = load if k > 1 else 0.0
        buses.append({"id": k, "v_min": 0.95, "v_max": 1.05,
                      "pd_mw": pd, "qd_mvar": round(0.3 * pd, 6)})
    branches = [{"from": 0, "to": 1, "r": 0.01 * base / s_tr, "x": 0.04 * base / s_tr,
                 "rate_mva": s_tr}]
    topo = [(k, k + 1) for k in range(1, 10)] + [(4, 11), (11, 12), (12, 13),
                                                 (7, 14), (14, 15), (15, 16)]
    for f, t in topo:
        branches.append({"from": f, "to": t, "r": r_km * seg_km / z_base,
                         "x": x_km * seg_km / z_base, "rate_mva": 0.25})
    gens = [{"bus": b, "p_min_mw": 0.0, "p_max_mw": 0.05, "q_min_mvar": -0.03,
             "q_max_mvar": 0.03} for b in (3, 5, 8, 10, 12, 13, 15, 16)]
    return {"name": "lv_radial", "base_mva": base, "buses": buses,
            "branches": branches, "generators": gens}


def mv_trafo() -> dict:
    """20 kV overhead feeder behind a 20 MVA HV/MV transformer."""
    base, v_kv, s_tr = 10.0, 20.0, 20.0
    z_base = v_kv**2 / base
    r_km, x_km, seg_km = 0.3, 0.35, 2.0
    load = 1.5
    buses = [{"id": 0, "kind": "slack", "v_min": 0.95, "v_max": 1.05, "v_set": 1.0}]
    for k in range(1, 15):
        pd = load if k > 1 else 0.0
        buses.append({"id": k, "v_min": 0.95, "v_max": 1.05,
                      "pd_mw": pd, "qd_mvar": round(0.4 * pd, 6)})
    branches = [{"from": 0, "to": 1, "r": 0.005 * base / s_tr, "x": 0.12 * base / s_tr,
                 "rate_mva": s_tr}]
    topo = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (3, 9), (9, 10),
            (10, 11), (1, 12), (12, 13), (13, 14)]
    for f, t in topo:
        branches.append({"from": f, "to": t, "r": r_km * seg_km / z_base,
                         "x": x_km * seg_km / z_base, "rate_mva": 15.0})
    gens = [{"bus": b, "p_min_mw": 0.0, "p_max_mw": 4.0, "q_min_mvar": -2.5,
             "q_max_mvar": 2.5} for b in (4, 6, 8, 10, 11, 13, 14)]
    return {"name": "mv_trafo", "base_mva": base, "buses": buses,
            "branches": branches, "generators": gens}


def synthetic_radial(n: int = 120, seed: int = 7) -> dict:
    """Random 20 kV radial tree; most buses extend the previous one."""
    rng = np.random.default_rng(seed)
    base, s_tr, load = 10.0, 25.0, 0.15
    z_base = 20.0**2 / base
    buses = [{"id": 0, "kind": "slack", "v_min": 0.95, "v_max": 1.05, "v_set": 1.0}]
    for k in range(1, n):
        pd = 0.0 if k == 1 else round(float(rng.uniform(0.5, 1.5) * load), 4)
        qd = 0.0 if k == 1 else round(float(rng.uniform(0.2, 0.5) * load), 4)
        buses.append({"id": k, "v_min": 0.95, "v_max": 1.05, "pd_mw": pd, "qd_mvar": qd})
    branches = [{"from": 0, "to": 1, "r": 0.005 * base / s_tr, "x": 0.12 * base / s_tr,
                 "rate_mva": s_tr}]
    for k in range(2, n):
        parent = k - 1 if rng.random() < 0.75 else int(rng.integers(1, k))
        length = float(rng.uniform(0.3, 1.2))
        branches.append({"from": parent, "to": k, "r": round(0.3 * length / z_base, 6),
                         "x": round(0.35 * length / z_base, 6)})
    gen_buses = sorted(rng.choice(np.arange(2, n), size=n // 5, replace=False).tolist())
    gens = [{"bus": int(b), "p_min_mw": 0.0, "p_max_mw": 0.6, "q_min_mvar": -0.3,
             "q_max_mvar": 0.3} for b in gen_buses]
    return {"name": f"radial_{n}", "base_mva": base, "buses": buses,
            "branches": branches, "generators": gens}


def main() -> None:
    for doc in (two_bus(), lv_radial(), mv_trafo(), synthetic_radial(120)):
        path = OUT / f"{doc['name']}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        print(path)


if __name__ == "__main__":
    main()
