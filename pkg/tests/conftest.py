from __future__ import annotations

import pytest

from pqcap.cases import BUNDLED, load_bundled
from pqcap.netmodel import Branch, Bus, Generator, NetworkCase

_ACCEPTANCE: dict[str, tuple[bool, list[str]]] = {}


def make_two_bus(r=0.0, x=0.1, b_c=0.0, tap=1.0, shift=0.0, rating=0.0, v_band=(0.9, 1.1),
                 gen=(0.0, 1.0, -1.0, 1.0), p_d=0.0, q_d=0.0, v0=1.0, shunt=0.0j):
    """Slack bus 0 feeding bus 1 over a single branch, one generator at bus 1."""
    buses = (
        Bus(0, "slack", v_band[0], v_band[1], v_set=v0),
        Bus(1, "load", v_band[0], v_band[1], shunt.real, shunt.imag),
    )
    branches = (Branch(0, 1, r, x, b_c, tap, shift, rating),)
    gens = (Generator(1, *gen),) if gen is not None else ()
    return NetworkCase(1.0, buses, branches, gens, (0.0, p_d), (0.0, q_d), name="two")


def make_chain(n=3, x=0.1, r=0.0):
    buses = tuple(Bus(k, "slack" if k == 0 else "load") for k in range(n))
    branches = tuple(Branch(k, k + 1, r, x) for k in range(n - 1))
    gens = (Generator(n - 1, 0.0, 1.0, -1.0, 1.0),)
    return NetworkCase(1.0, buses, branches, gens, (0.0,) * n, (0.0,) * n, name="chain")


def make_mixed():
    """4-bus meshed case with charging, an off-nominal shifted transformer and shunts."""
    buses = (
        Bus(10, "slack", 0.9, 1.1, v_set=1.02),
        Bus(11, "load", 0.9, 1.1, 0.01, 0.05),
        Bus(12, "load", 0.9, 1.1),
        Bus(13, "load", 0.9, 1.1, 0.0, -0.02),
    )
    branches = (
        Branch(10, 11, 0.02, 0.08, 0.1, s_rating=2.0),
        Branch(11, 12, 0.01, 0.05, 0.0, tap=1.02, shift=0.005, s_rating=1.0),
        Branch(12, 13, 0.03, 0.04, 0.04),
        Branch(13, 10, 0.02, 0.06, 0.02),
        Branch(11, 13, 0.5, 0.5, 0.0, status=False),
    )
    gens = (Generator(12, 0.0, 0.6, -0.3, 0.3), Generator(13, 0.0, 0.4, -0.2, 0.2))
    return NetworkCase(100.0, buses, branches, gens, (0.0, 0.2, 0.1, 0.15),
                       (0.0, 0.05, 0.02, 0.04), name="mixed")


@pytest.fixture
def two_bus():
    return make_two_bus()


@pytest.fixture(params=BUNDLED)
def bundled(request):
    return load_bundled(request.param)


@pytest.fixture
def lv_case():
    return load_bundled("lv_radial")


@pytest.fixture
def mv_case():
    return load_bundled("mv_trafo")


@pytest.fixture
def acceptance():
    def record(criterion: str, ok: bool, detail: str = "") -> bool:
        prev_ok, details = _ACCEPTANCE.get(criterion, (True, []))
        _ACCEPTANCE[criterion] = (prev_ok and bool(ok), details + [detail] * bool(detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0].lstrip("C"))):
        ok, details = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}")
        for detail in details:
            terminalreporter.write_line(f"        {detail}")
