"""Exact 2-D convex polygon engine in the (P, Q) plane.

Polygons are built by clipping a bounding box with half-planes
``a_p*P + a_q*Q <= rhs``. Vertices are stored counter-clockwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

TOL = 1e-9

Point = tuple[float, float]


@dataclass(frozen=True)
class Tag:
    """Provenance of a half-plane: constraint family plus source index."""

    family: str  # generator | voltage | branch | box
    index: int = -1
    label: str = ""

    def to_dict(self) -> dict:
        return {"family": self.family, "index": self.index, "label": self.label}


BOX = Tag("box")


@dataclass(frozen=True)
class Halfspace:
    a_p: float
    a_q: float
    rhs: float
    tag: Tag = BOX

    def __post_init__(self):
        if self.a_p == 0 and self.a_q == 0:
            raise ValueError("half-plane normal must be non-zero")

    @property
    def norm(self) -> float:
        return math.hypot(self.a_p, self.a_q)

    def slack(self, p: float, q: float) -> float:
        """Signed distance of ``(p, q)`` past the boundary (>0 means outside)."""
        return (self.a_p * p + self.a_q * q - self.rhs) / self.norm

    def to_dict(self) -> dict:
        return {"a_p": self.a_p, "a_q": self.a_q, "rhs": self.rhs, "tag": self.tag.to_dict()}


@dataclass(frozen=True)
class HalfspaceSet:
    halfspaces: tuple[Halfspace, ...] = ()
    infeasible: bool = False

    def __iter__(self) -> Iterator[Halfspace]:
        return iter(self.halfspaces)

    def __len__(self) -> int:
        return len(self.halfspaces)

    def __getitem__(self, k):
        return self.halfspaces[k]

    def __add__(self, other: "HalfspaceSet") -> "HalfspaceSet":
        return HalfspaceSet(self.halfspaces + tuple(other), self.infeasible or other.infeasible)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.halfspaces:
            return np.zeros((0, 2)), np.zeros(0)
        A = np.array([[h.a_p, h.a_q] for h in self.halfspaces])
        b = np.array([h.rhs for h in self.halfspaces])
        return A, b

    def by_family(self, family: str) -> "HalfspaceSet":
        return HalfspaceSet(tuple(h for h in self.halfspaces if h.tag.family == family),
                            self.infeasible)


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple[Point, ...] = field(default_factory=tuple)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def __len__(self) -> int:
        return len(self.vertices)

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float).reshape(-1, 2)

    def centroid(self) -> Point:
        """Area centroid (vertex mean for degenerate polygons)."""
        pts = self.as_array()
        if len(pts) == 0:
            raise ValueError("empty polygon has no centroid")
        a = _signed_area(pts)
        if abs(a) <= TOL**2:
            c = pts.mean(axis=0)
            return float(c[0]), float(c[1])
        x, y = pts[:, 0], pts[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        cx = np.sum((x + xn) * cross) / (6 * a)
        cy = np.sum((y + yn) * cross) / (6 * a)
        return float(cx), float(cy)

    def edges(self) -> Iterator[tuple[Point, Point]]:
        n = len(self.vertices)
        for k in range(n):
            yield self.vertices[k], self.vertices[(k + 1) % n]

    def to_halfspaces(self, tag: Tag = BOX) -> HalfspaceSet:
        """Edge half-planes of a non-degenerate polygon."""
        out = []
        if len(self.vertices) >= 3:
            for (x0, y0), (x1, y1) in self.edges():
                a_p, a_q = y1 - y0, x0 - x1
                out.append(Halfspace(a_p, a_q, a_p * x0 + a_q * y0, tag))
        return HalfspaceSet(tuple(out))


BBox = tuple[float, float, float, float]  # p_lo, p_hi, q_lo, q_hi


def bbox_polygon(bbox: BBox) -> list[Point]:
    p_lo, p_hi, q_lo, q_hi = bbox
    if not (p_lo <= p_hi and q_lo <= q_hi):
        raise ValueError(f"invalid bounding box {bbox}")
    return [(p_lo, q_lo), (p_hi, q_lo), (p_hi, q_hi), (p_lo, q_hi)]


def inflate_bbox(bbox: BBox, frac: float = 0.1, floor: float = 1e-3) -> BBox:
    p_lo, p_hi, q_lo, q_hi = bbox
    dp = max(frac * (p_hi - p_lo), floor)
    dq = max(frac * (q_hi - q_lo), floor)
    return p_lo - dp, p_hi + dp, q_lo - dq, q_hi + dq


def _signed_area(pts: np.ndarray) -> float:
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _cleanup(pts: list[Point], tol: float = TOL) -> list[Point]:
    """Merge near-duplicate vertices and drop collinear ones."""
    out: list[Point] = []
    for pt in pts:
        if not out or math.dist(pt, out[-1]) > tol:
            out.append(pt)
    while len(out) > 1 and math.dist(out[0], out[-1]) <= tol:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        n = len(out)
        for k in range(n):
            a, b, c = out[k - 1], out[k], out[(k + 1) % n]
            ac = math.dist(a, c)
            if ac <= tol:
                dist = math.dist(a, b)
            else:
                dist = abs((c[0] - a[0]) * (b[1] - a[1]) - (c[1] - a[1]) * (b[0] - a[0])) / ac
            if dist <= tol:
                del out[k]
                changed = True
                break
    if len(out) == 2 and math.dist(out[0], out[1]) <= tol:
        out.pop()
    return out


def clip(vertices: Sequence[Point], h: Halfspace, tol: float = TOL) -> list[Point]:
    """One Sutherland-Hodgman pass of a convex vertex loop against ``h``."""
    if not vertices:
        return []
    dist = [h.slack(*v) for v in vertices]
    out: list[Point] = []
    n = len(vertices)
    for k in range(n):
        s, e = vertices[k - 1], vertices[k]
        ds, de = dist[k - 1], dist[k]
        if de <= tol:
            if ds > tol:
                out.append(_cut(s, e, ds, de))
            out.append(e)
        elif ds <= tol:
            out.append(_cut(s, e, ds, de))
    return out


def _cut(s: Point, e: Point, ds: float, de: float) -> Point:
    t = ds / (ds - de)
    t = min(max(t, 0.0), 1.0)
    return s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])


def polygon_from_halfspaces(hs: Iterable[Halfspace], bbox: BBox, tol: float = TOL) -> ConvexPolygon:
    """Feasible region of ``hs`` inside ``bbox``; empty polygon if infeasible."""
    if isinstance(hs, HalfspaceSet) and hs.infeasible:
        return ConvexPolygon()
    pts = _cleanup(bbox_polygon(bbox), tol)
    for h in hs:
        pts = clip(pts, h, tol)
        if not pts:
            return ConvexPolygon()
        pts = _cleanup(pts, tol)
    return ConvexPolygon(tuple((float(x), float(y)) for x, y in pts))


def area(poly: ConvexPolygon) -> float:
    return abs(_signed_area(poly.as_array()))


def intersect(a: ConvexPolygon, b: ConvexPolygon, tol: float = TOL) -> ConvexPolygon:
    """Intersection of two convex polygons (empty if either is degenerate)."""
    if len(a) < 3 or len(b) < 3:
        return ConvexPolygon()
    pts = list(a.vertices)
    for h in b.to_halfspaces():
        pts = clip(pts, h, tol)
        if not pts:
            return ConvexPolygon()
        pts = _cleanup(pts, tol)
    return ConvexPolygon(tuple(pts))


def contains(hs: Iterable[Halfspace], point: Point, tol: float = TOL) -> bool:
    p, q = point
    return all(h.a_p * p + h.a_q * q - h.rhs <= tol for h in hs)


def minimal_representation(hs: HalfspaceSet, bbox: BBox, tol: float = TOL) -> HalfspaceSet:
    """Keep only the half-planes whose boundary supports an edge of the region.

    Each polygon edge is attributed to the first half-plane (in input order)
    that is tight at both edge endpoints. Bounding-box edges are not
    reported.
    """
    poly = polygon_from_halfspaces(hs, bbox, tol)
    if poly.is_empty:
        return HalfspaceSet((), infeasible=True)
    verts = poly.vertices
    chosen: set[int] = set()
    if len(verts) >= 3:
        for v0, v1 in poly.edges():
            for k, h in enumerate(hs):
                if abs(h.slack(*v0)) <= tol and abs(h.slack(*v1)) <= tol:
                    chosen.add(k)
                    break
    else:
        for k, h in enumerate(hs):
            if any(abs(h.slack(*v)) <= tol for v in verts):
                chosen.add(k)
    return HalfspaceSet(tuple(h for k, h in enumerate(hs) if k in chosen))


def edge_sources(poly: ConvexPolygon, hs: HalfspaceSet, tol: float = TOL) -> list[Halfspace | None]:
    """For each polygon edge, the first half-plane tight along it (or None)."""
    out: list[Halfspace | None] = []
    for v0, v1 in poly.edges():
        out.append(next((h for h in hs
                         if abs(h.slack(*v0)) <= tol and abs(h.slack(*v1)) <= tol), None))
    return out


def convex_hull(points: Iterable[Point], tol: float = TOL) -> ConvexPolygon:
    """Counter-clockwise hull (Andrew's monotone chain)."""
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) <= 2:
        return ConvexPolygon(tuple(_cleanup(pts, tol)))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return ConvexPolygon(tuple(_cleanup(lower[:-1] + upper[:-1], tol)))


def scale(poly: ConvexPolygon, factor: float, about: Point | None = None) -> ConvexPolygon:
    """Homothety of ``poly`` by ``factor`` about ``about`` (default centroid)."""
    if poly.is_empty:
        return poly
    cx, cy = poly.centroid() if about is None else about
    return ConvexPolygon(tuple((cx + factor * (x - cx), cy + factor * (y - cy))
                               for x, y in poly.vertices))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def to_json(poly: ConvexPolygon) -> str:
    return json.dumps([[x, y] for x, y in poly.vertices])


def from_json(text: str) -> ConvexPolygon:
    return ConvexPolygon(tuple((float(x), float(y)) for x, y in json.loads(text)))


def to_csv(poly: ConvexPolygon) -> str:
    lines = ["p,q"] + [f"{x!r},{y!r}" for x, y in poly.vertices]
    return "\n".join(lines) + "\n"


def to_svg_path(poly: ConvexPolygon, flip_q: bool = True) -> str:
    """SVG path data; Q is negated by default since SVG's y axis points down."""
    if poly.is_empty:
        return ""
    sign = -1.0 if flip_q else 1.0
    parts = [f"{'M' if k == 0 else 'L'} {x:.9g} {sign * y:.9g}"
             for k, (x, y) in enumerate(poly.vertices)]
    return " ".join(parts) + " Z"
