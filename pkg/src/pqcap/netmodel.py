"""Grid data model and case-file ingestion.

Cases are held in per-unit on the system base. Two input formats are
understood:

* ``native-json``: the documented JSON schema (see README). Power quantities
  are given in MW / MVAr / MVA, impedances in per-unit on ``base_mva``,
  voltages in per-unit, phase shifts in degrees.
* ``matpower-subset``: ``mpc.baseMVA``, ``mpc.bus``, ``mpc.gen`` and
  ``mpc.branch`` tables of a MATPOWER case file.
"""

from __future__ import annotations

import json
import math
import re
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

SLACK = "slack"
LOAD = "load"

FORMATS = ("native-json", "matpower-subset")


class CaseError(ValueError):
    """Raised when a case file cannot be turned into a valid NetworkCase."""


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str = LOAD
    v_min: float = 0.9
    v_max: float = 1.1
    shunt_g: float = 0.0
    shunt_b: float = 0.0
    v_set: float = 1.0


@dataclass(frozen=True)
class Branch:
    """Pi-model branch. ``s_rating == 0`` means unlimited."""

    from_bus: int
    to_bus: int
    r_s: float
    x_s: float
    b_c: float = 0.0
    tap: float = 1.0
    shift: float = 0.0
    s_rating: float = 0.0
    status: bool = True


@dataclass(frozen=True)
class Generator:
    bus: int
    p_min: float
    p_max: float
    q_min: float
    q_max: float


@dataclass(frozen=True)
class NetworkCase:
    """Immutable grid case in per-unit.

    ``p_d`` and ``q_d`` are nodal demands ordered like ``buses``.
    """

    base_mva: float
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...]
    p_d: tuple[float, ...]
    q_d: tuple[float, ...]
    name: str = ""

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def in_service(self) -> tuple[Branch, ...]:
        return tuple(br for br in self.branches if br.status)

    @cached_property
    def bus_index(self) -> dict[int, int]:
        return {bus.id: k for k, bus in enumerate(self.buses)}

    @property
    def slack_index(self) -> int:
        slacks = [k for k, bus in enumerate(self.buses) if bus.kind == SLACK]
        if len(slacks) != 1:
            raise CaseError(f"expected exactly one slack bus, found {len(slacks)}")
        return slacks[0]

    @property
    def v0(self) -> float:
        return self.buses[self.slack_index].v_set

    def demand(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.p_d, dtype=float), np.array(self.q_d, dtype=float)

    def v_limits(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.array([b.v_min for b in self.buses], dtype=float),
            np.array([b.v_max for b in self.buses], dtype=float),
        )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _connected(case: NetworkCase) -> bool:
    idx = case.bus_index
    adj: dict[int, list[int]] = {k: [] for k in range(case.n_buses)}
    for br in case.in_service:
        if br.from_bus in idx and br.to_bus in idx:
            f, t = idx[br.from_bus], idx[br.to_bus]
            adj[f].append(t)
            adj[t].append(f)
    if not adj:
        return False
    seen = {0}
    todo = deque([0])
    while todo:
        k = todo.popleft()
        for j in adj[k]:
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return len(seen) == case.n_buses


def validate_case(case: NetworkCase) -> list[str]:
    """Return human-readable descriptions of every violated case invariant.

    An empty list means the case is valid. The input is never modified.
    """
    diags: list[str] = []
    ids = [b.id for b in case.buses]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        diags.append(f"duplicate bus id(s): {dup}")
    n_slack = sum(b.kind == SLACK for b in case.buses)
    if n_slack == 0:
        diags.append("missing slack bus")
    elif n_slack > 1:
        diags.append("multiple slack buses")
    for b in case.buses:
        if b.kind not in (SLACK, LOAD):
            diags.append(f"bus {b.id}: unknown kind {b.kind!r}")
        if b.v_min <= 0:
            diags.append(f"bus {b.id}: non-positive v_min {b.v_min}")
        if b.v_min == b.v_max:
            diags.append(f"bus {b.id}: degenerate voltage band [{b.v_min}, {b.v_max}]")
        elif b.v_min > b.v_max:
            diags.append(f"bus {b.id}: inverted voltage band [{b.v_min}, {b.v_max}]")
    known = set(ids)
    for i, br in enumerate(case.branches):
        for end in (br.from_bus, br.to_bus):
            if end not in known:
                diags.append(f"branch {i}: unknown bus {end}")
        if br.r_s**2 + br.x_s**2 <= 0:
            diags.append(f"branch {i}: zero series impedance")
        if br.tap <= 0:
            diags.append(f"branch {i}: non-positive tap {br.tap}")
        if br.s_rating < 0:
            diags.append(f"branch {i}: negative rating {br.s_rating}")
    for i, g in enumerate(case.generators):
        if g.bus not in known:
            diags.append(f"generator {i}: unknown bus {g.bus}")
        if g.p_min > g.p_max:
            diags.append(f"generator {i} (bus {g.bus}): p_min {g.p_min} > p_max {g.p_max}")
        if g.q_min > g.q_max:
            diags.append(f"generator {i} (bus {g.bus}): q_min {g.q_min} > q_max {g.q_max}")
    if len(case.p_d) != case.n_buses or len(case.q_d) != case.n_buses:
        diags.append("demand vector length differs from bus count")
    if case.n_buses and not dup and not _connected(case):
        diags.append("disconnected network graph")
    return diags


# ---------------------------------------------------------------------------
# native JSON
# ---------------------------------------------------------------------------


def _get(obj: dict, key: str, where: str, default=None, required: bool = False):
    if key in obj:
        val = obj[key]
    elif required:
        raise CaseError(f"{where}: missing field '{key}'")
    else:
        return default
    if isinstance(default, bool) or key == "status":
        return bool(val)
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise CaseError(f"{where}.{key}: expected a number, got {val!r}")
    return float(val)


def _parse_native(text: str) -> NetworkCase:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise CaseError("top level must be a JSON object")
    base = _get(doc, "base_mva", "case", required=True)
    if base <= 0:
        raise CaseError("case.base_mva: must be positive")
    buses, p_d, q_d = [], [], []
    for k, raw in enumerate(doc.get("buses", [])):
        where = f"buses[{k}]"
        if "id" not in raw:
            raise CaseError(f"{where}: missing field 'id'")
        kind = raw.get("kind", LOAD)
        buses.append(
            Bus(
                id=int(raw["id"]),
                kind=kind,
                v_min=_get(raw, "v_min", where, 0.9),
                v_max=_get(raw, "v_max", where, 1.1),
                shunt_g=_get(raw, "gs_mw", where, 0.0) / base,
                shunt_b=_get(raw, "bs_mvar", where, 0.0) / base,
                v_set=_get(raw, "v_set", where, 1.0),
            )
        )
        p_d.append(_get(raw, "pd_mw", where, 0.0) / base)
        q_d.append(_get(raw, "qd_mvar", where, 0.0) / base)
    branches = []
    for k, raw in enumerate(doc.get("branches", [])):
        where = f"branches[{k}]"
        for key in ("from", "to"):
            if key not in raw:
                raise CaseError(f"{where}: missing field '{key}'")
        branches.append(
            Branch(
                from_bus=int(raw["from"]),
                to_bus=int(raw["to"]),
                r_s=_get(raw, "r", where, 0.0),
                x_s=_get(raw, "x", where, 0.0),
                b_c=_get(raw, "b", where, 0.0),
                tap=_get(raw, "tap", where, 1.0) or 1.0,
                shift=math.radians(_get(raw, "shift_deg", where, 0.0)),
                s_rating=_get(raw, "rate_mva", where, 0.0) / base,
                status=_get(raw, "status", where, True),
            )
        )
    gens = []
    for k, raw in enumerate(doc.get("generators", [])):
        where = f"generators[{k}]"
        if "bus" not in raw:
            raise CaseError(f"{where}: missing field 'bus'")
        gens.append(
            Generator(
                bus=int(raw["bus"]),
                p_min=_get(raw, "p_min_mw", where, 0.0) / base,
                p_max=_get(raw, "p_max_mw", where, required=True) / base,
                q_min=_get(raw, "q_min_mvar", where, 0.0) / base,
                q_max=_get(raw, "q_max_mvar", where, 0.0) / base,
            )
        )
    return NetworkCase(
        base_mva=base,
        buses=tuple(buses),
        branches=tuple(branches),
        generators=tuple(gens),
        p_d=tuple(p_d),
        q_d=tuple(q_d),
        name=str(doc.get("name", "")),
    )


def serialize_case(case: NetworkCase) -> str:
    """Write ``case`` in the native JSON format (physical units)."""
    base = case.base_mva
    doc = {
        "name": case.name,
        "base_mva": base,
        "buses": [
            {
                "id": b.id,
                "kind": b.kind,
                "v_min": b.v_min,
                "v_max": b.v_max,
                "v_set": b.v_set,
                "gs_mw": b.shunt_g * base,
                "bs_mvar": b.shunt_b * base,
                "pd_mw": pd * base,
                "qd_mvar": qd * base,
            }
            for b, pd, qd in zip(case.buses, case.p_d, case.q_d)
        ],
        "branches": [
            {
                "from": br.from_bus,
                "to": br.to_bus,
                "r": br.r_s,
                "x": br.x_s,
                "b": br.b_c,
                "tap": br.tap,
                "shift_deg": math.degrees(br.shift),
                "rate_mva": br.s_rating * base,
                "status": bool(br.status),
            }
            for br in case.branches
        ],
        "generators": [
            {
                "bus": g.bus,
                "p_min_mw": g.p_min * base,
                "p_max_mw": g.p_max * base,
                "q_min_mvar": g.q_min * base,
                "q_max_mvar": g.q_max * base,
            }
            for g in case.generators
        ],
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# MATPOWER subset
# ---------------------------------------------------------------------------

_TABLE_RE = re.compile(r"mpc\.(bus|gen|branch)\s*=\s*\[")
_BASE_RE = re.compile(r"mpc\.baseMVA\s*=\s*([-+0-9.eE]+)\s*;?")

_MIN_COLS = {"bus": 13, "gen": 10, "branch": 11}


def _matpower_tables(text: str) -> tuple[float, dict[str, list[tuple[int, list[float]]]]]:
    base = None
    tables: dict[str, list[tuple[int, list[float]]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if current is None:
            m = _BASE_RE.search(line)
            if m:
                try:
                    base = float(m.group(1))
                except ValueError as exc:
                    raise CaseError(f"line {lineno}: bad baseMVA {m.group(1)!r}") from exc
                continue
            m = _TABLE_RE.search(line)
            if m:
                current = m.group(1)
                tables[current] = []
                line = line[m.end():]
            else:
                continue
        closing = "]" in line
        body = line.split("]", 1)[0]
        for row in body.split(";"):
            row = row.strip()
            if not row:
                continue
            try:
                vals = [float(tok) for tok in row.replace(",", " ").split()]
            except ValueError as exc:
                raise CaseError(f"line {lineno}: non-numeric entry in mpc.{current}") from exc
            if len(vals) < _MIN_COLS[current]:
                raise CaseError(
                    f"line {lineno}: mpc.{current} row has {len(vals)} columns, "
                    f"expected at least {_MIN_COLS[current]}"
                )
            tables[current].append((lineno, vals))
        if closing:
            current = None
    if current is not None:
        raise CaseError(f"unterminated mpc.{current} table")
    if base is None:
        raise CaseError("missing mpc.baseMVA")
    for name in ("bus", "branch"):
        if name not in tables:
            raise CaseError(f"missing mpc.{name} table")
    return base, tables


def _parse_matpower(text: str) -> NetworkCase:
    base, tables = _matpower_tables(text)
    if base <= 0:
        raise CaseError("mpc.baseMVA must be positive")
    buses, p_d, q_d = [], [], []
    slack_ids = set()
    for lineno, row in tables["bus"]:
        bus_id, btype = int(row[0]), int(row[1])
        if btype == 4:
            raise CaseError(f"line {lineno}: isolated bus {bus_id} not supported")
        kind = SLACK if btype == 3 else LOAD
        if kind == SLACK:
            slack_ids.add(bus_id)
        buses.append(
            Bus(
                id=bus_id,
                kind=kind,
                v_min=row[12],
                v_max=row[11],
                shunt_g=row[4] / base,
                shunt_b=row[5] / base,
                v_set=row[7],
            )
        )
        p_d.append(row[2] / base)
        q_d.append(row[3] / base)
    gens = []
    for lineno, row in tables.get("gen", []):
        bus_id = int(row[0])
        if row[7] <= 0:
            continue
        if bus_id in slack_ids:
            # the slack machine is the transmission grid; its VG is the feeder voltage
            buses = [replace(b, v_set=row[5]) if b.id == bus_id else b for b in buses]
            continue
        gens.append(
            Generator(
                bus=bus_id,
                p_min=row[9] / base,
                p_max=row[8] / base,
                q_min=row[4] / base,
                q_max=row[3] / base,
            )
        )
    branches = []
    for lineno, row in tables["branch"]:
        branches.append(
            Branch(
                from_bus=int(row[0]),
                to_bus=int(row[1]),
                r_s=row[2],
                x_s=row[3],
                b_c=row[4],
                tap=row[8] if row[8] != 0 else 1.0,
                shift=math.radians(row[9]),
                s_rating=row[5] / base,
                status=bool(row[10]),
            )
        )
    return NetworkCase(
        base_mva=base,
        buses=tuple(buses),
        branches=tuple(branches),
        generators=tuple(gens),
        p_d=tuple(p_d),
        q_d=tuple(q_d),
    )


def parse_case(text: str, format: str = "native-json") -> NetworkCase:
    """Parse case-file ``text`` into a validated per-unit NetworkCase.

    Raises
    ------
    CaseError
        On syntax errors (with line or field location) and on any
        violated case invariant, e.g. missing or multiple slack buses,
        duplicate bus ids, or a disconnected graph.
    """
    if format == "native-json":
        case = _parse_native(text)
    elif format == "matpower-subset":
        case = _parse_matpower(text)
    else:
        raise CaseError(f"unknown case format {format!r}; expected one of {FORMATS}")
    diags = validate_case(case)
    if diags:
        raise CaseError("; ".join(diags))
    return case


def load_case(path, format: str | None = None) -> NetworkCase:
    """Read a case file, guessing the format from the suffix when not given."""
    from pathlib import Path

    path = Path(path)
    if format is None:
        format = "matpower-subset" if path.suffix == ".m" else "native-json"
    case = parse_case(path.read_text(encoding="utf-8"), format)
    if not case.name:
        case = replace(case, name=path.stem)
    return case
