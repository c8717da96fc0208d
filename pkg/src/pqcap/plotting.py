"""SVG figures for capability, validation and benchmark reports.

Figures are built on bare ``Figure`` objects (no pyplot state) and saved with
a fixed hash salt and no timestamp so repeated runs produce identical files.
"""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib
from matplotlib.figure import Figure
from matplotlib.patches import Polygon as PolygonPatch

from . import polytope2d as p2d
from .capability import CapabilityResult
from .polytope2d import ConvexPolygon
from .reports import semilog_regression
from .scanner import BenchRecord, ScanResult

STYLE = {
    "generator": dict(facecolor="#cfe3f5", edgecolor="#7fb0dc", alpha=1.0, label="generator"),
    "branch": dict(facecolor="#1f4e9c", edgecolor="#1f4e9c", alpha=0.55, label="branch flow"),
    "voltage": dict(facecolor="none", edgecolor="#d62728", linewidth=2.0, label="voltage"),
    "polygon": dict(facecolor="none", edgecolor="black", linewidth=1.5, label="polyhedral set"),
    "admissible": dict(facecolor="none", edgecolor="#2ca02c", linewidth=1.5, linestyle="--",
                       label="admissible (AC)"),
    "resulting": dict(facecolor="none", edgecolor="#ff7f0e", linewidth=1.5, linestyle=":",
                      label="resulting (AC)"),
}


def _add(ax, poly: ConvexPolygon, style: dict) -> None:
    if len(poly) >= 3:
        ax.add_patch(PolygonPatch(poly.as_array(), closed=True, **style))
    elif len(poly) > 0:
        pts = poly.as_array()
        ax.plot(pts[:, 0], pts[:, 1], marker="o", color=style.get("edgecolor", "black"),
                label=style.get("label"))


def _frame(ax, bbox, base_mva: float | None) -> None:
    p_lo, p_hi, q_lo, q_hi = bbox
    ax.set_xlim(p_lo, p_hi)
    ax.set_ylim(q_lo, q_hi)
    unit = "p.u." if base_mva is None else f"p.u. on {base_mva:g} MVA"
    ax.set_xlabel(f"P ({unit})")
    ax.set_ylabel(f"Q ({unit})")
    ax.grid(True, linewidth=0.3)
    ax.legend(loc="best", fontsize=8)


def _svg(fig: Figure) -> bytes:
    buf = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": "pqcap", "svg.fonttype": "path"}):
        fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    return buf.getvalue()


def composition_figure(result: CapabilityResult, title: str = "",
                       base_mva: float | None = None) -> bytes:
    """Generator box, branch and voltage regions, and the final polygon."""
    fig = Figure(figsize=(6, 4.5))
    ax = fig.add_subplot()
    for fam in ("generator", "branch", "voltage"):
        if len(result.families[fam]):
            _add(ax, result.family_region(fam), STYLE[fam])
    _add(ax, result.polygon, STYLE["polygon"])
    ax.set_title(title or "PQ capability composition")
    _frame(ax, result.bbox, base_mva)
    return _svg(fig)


def validation_figure(result: CapabilityResult, scan: ScanResult, title: str = "",
                      base_mva: float | None = None) -> bytes:
    """Polyhedral set against the oracle-traced admissible and resulting areas."""
    fig = Figure(figsize=(6, 4.5))
    ax = fig.add_subplot()
    _add(ax, result.polygon, STYLE["polygon"])
    _add(ax, scan.admissible, STYLE["admissible"])
    _add(ax, scan.resulting, STYLE["resulting"])
    pts = [v for poly in (result.polygon, scan.admissible, scan.resulting) for v in poly.vertices]
    bbox = p2d.inflate_bbox((min(p for p, _ in pts), max(p for p, _ in pts),
                             min(q for _, q in pts), max(q for _, q in pts)), 0.08)
    ax.set_title(title or "polyhedral vs. AC-traced PQ areas")
    _frame(ax, bbox, base_mva)
    return _svg(fig)


def complexity_figure(records: Sequence[BenchRecord]) -> bytes:
    """Semi-log computing time over bus count with fitted regression lines."""
    ok = [r for r in records if not r.error]
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    n = [r.n_buses for r in ok]
    for attr, label, color in (("t_poly", "polyhedral", "#1f4e9c"),
                               ("t_scan", "AC scan", "#d62728")):
        t = [getattr(r, attr) for r in ok]
        ax.semilogy(n, t, "o", color=color, label=label)
        if len(ok) >= 2:
            slope, icpt = semilog_regression(n, t)
            xs = [min(n), max(n)]
            ax.semilogy(xs, [10 ** (icpt + slope * x) for x in xs], "-", color=color,
                        linewidth=1, label=f"{label} fit (slope {slope:.3g}/bus)")
    ax.set_xlabel("buses (-)")
    ax.set_ylabel("computing time (s)")
    ax.set_title("complexity comparison")
    ax.grid(True, which="both", linewidth=0.3)
    ax.legend(fontsize=8)
    return _svg(fig)
