"""Bundled desk-scale cases.

``two_bus``
    Single reactive line, the analytic reference case.
``lv_radial``
    17-bus 0.4 kV cable feeder (R/X = 2.5) with eight PV units.
``mv_trafo``
    15-bus 20 kV feeder behind an HV/MV transformer.
``radial_120``
    Synthetic 120-bus radial tree for complexity benchmarks.
"""

from __future__ import annotations

from importlib import resources

from ..netmodel import NetworkCase, parse_case

BUNDLED = ("two_bus", "lv_radial", "mv_trafo", "radial_120")


def bundled_path(name: str):
    return resources.files(__name__).joinpath(f"{name}.json")


def load_bundled(name: str) -> NetworkCase:
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled case {name!r}; choose from {BUNDLED}")
    return parse_case(bundled_path(name).read_text(encoding="utf-8"))
