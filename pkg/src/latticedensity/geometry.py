"""Planar polygon geometry for region-confined density estimation.

A :class:`Region` is an outer ring plus zero or more hole rings, in projected
planar coordinates (eastings/northings; no geodesy). The module supplies the
predicates the lattice layer needs: ring and region areas, boundary-inclusive
point containment, and a proper segment/boundary crossing test used to prune
node links that would jump across land.

Boundary convention (fixed so verdicts are reproducible): a point within
``EPS`` of any ring edge is a boundary point; boundary points count as inside
the region for the outer ring, and do not count as inside a hole. So a node
sitting exactly on the shoreline or on a hole edge is admitted.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

# Tolerance, in coordinate units, for on-boundary / collinearity decisions.
EPS = 1e-9

Point = tuple[float, float]

# Batch size for the vectorized segment-crossing test, bounds peak memory.
_SEGMENT_CHUNK = 4096


def _as_point_array(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected point data of shape (n, 2)")
    return pts


def _orient(a: Point, b: Point, c: Point) -> float:
    """Cross product (b - a) x (c - a); sign gives the turn direction."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _point_segment_distance(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length2 = dx * dx + dy * dy
    if length2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / length2
    t = min(1.0, max(0.0, t))
    return math.hypot(a[0] + t * dx - p[0], a[1] + t * dy - p[1])


def _sgn(d: float) -> int:
    """Sign of a distance-like quantity with the EPS dead zone."""
    if abs(d) <= EPS:
        return 0
    return 1 if d > 0 else -1


def _proper_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """True iff open segments (p1,p2) and (q1,q2) cross at a single interior point.

    Touching at an endpoint, collinear overlap, or grazing a vertex does not
    count. Orientation values are normalized to perpendicular distances so the
    EPS test is in coordinate units.
    """
    lq = math.hypot(q2[0] - q1[0], q2[1] - q1[1])
    lp = math.hypot(p2[0] - p1[0], p2[1] - p1[1])
    if lq <= EPS or lp <= EPS:
        return False
    d1 = _sgn(_orient(q1, q2, p1) / lq)
    d2 = _sgn(_orient(q1, q2, p2) / lq)
    d3 = _sgn(_orient(p1, p2, q1) / lp)
    d4 = _sgn(_orient(p1, p2, q2) / lp)
    return d1 * d2 < 0 and d3 * d4 < 0


def _closed_segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """True iff closed segments share any point (proper cross, touch, or overlap)."""
    if _proper_cross(p1, p2, q1, q2):
        return True
    for pt, (a, b) in (
        (p1, (q1, q2)),
        (p2, (q1, q2)),
        (q1, (p1, p2)),
        (q2, (p1, p2)),
    ):
        if _point_segment_distance(pt, a, b) <= EPS:
            return True
    return False


def _validate_ring_vertices(verts: tuple[Point, ...]) -> None:
    n = len(verts)
    if n < 3:
        raise ValueError(f"ring needs at least 3 vertices, got {n}")
    if math.hypot(verts[0][0] - verts[-1][0], verts[0][1] - verts[-1][1]) <= EPS:
        raise ValueError("ring closure is implicit; do not repeat the first vertex")
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        if math.hypot(b[0] - a[0], b[1] - a[1]) <= EPS:
            raise ValueError(f"consecutive identical vertices at index {i}")
    # Simplicity: brute-force O(E^2) edge pairing; regions are small.
    for i in range(n):
        a1, a2 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            b1, b2 = verts[j], verts[(j + 1) % n]
            adjacent = (j == i + 1) or (i == 0 and j == n - 1)
            if adjacent:
                # Shared-vertex edges may only touch at the shared vertex;
                # a collinear fold-back means the boundary overlaps itself.
                shared, far_a, far_b = (
                    (a2, a1, b2) if j == i + 1 else (a1, a2, b1)
                )
                if (
                    _point_segment_distance(far_b, a1, a2) <= EPS
                    or _point_segment_distance(far_a, b1, b2) <= EPS
                ):
                    raise ValueError(
                        f"ring folds back on itself at vertex {shared}"
                    )
            elif _closed_segments_intersect(a1, a2, b1, b2):
                raise ValueError(
                    f"ring is self-intersecting (edges {i} and {j})"
                )


@dataclass(frozen=True)
class Ring:
    """Simple polygon ring. Closure is implicit: the first vertex is not repeated."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        _validate_ring_vertices(verts)

    @cached_property
    def edges(self) -> np.ndarray:
        """Edge array of shape (E, 2, 2): edges[k] = [start, end]."""
        v = np.asarray(self.vertices, dtype=float)
        return np.stack([v, np.roll(v, -1, axis=0)], axis=1)

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        v = np.asarray(self.vertices, dtype=float)
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())


def ring_area(ring: Ring) -> float:
    """Unsigned shoelace area of a ring; orientation independent."""
    v = np.asarray(ring.vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return abs(float(np.sum(x * yn - xn * y))) / 2.0


def _ring_hits(pts: np.ndarray, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Classify points against one ring.

    Returns (parity_inside, on_boundary). The parity flag is only meaningful
    off the boundary; callers must combine the two. The crossing count uses
    half-open edges in y so that a ray through a vertex is counted once.
    """
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    boundary = np.zeros(len(pts), dtype=bool)
    eps2 = EPS * EPS
    for (ax, ay), (bx, by) in edges:
        dx, dy = bx - ax, by - ay
        length2 = dx * dx + dy * dy
        t = ((x - ax) * dx + (y - ay) * dy) / length2
        np.clip(t, 0.0, 1.0, out=t)
        ex = ax + t * dx - x
        ey = ay + t * dy - y
        boundary |= ex * ex + ey * ey <= eps2
        crossing = (ay > y) != (by > y)
        if crossing.any():
            denom = np.where(crossing, dy, 1.0)
            xint = ax + (y - ay) * dx / denom
            inside ^= crossing & (xint > x)
    return inside, boundary


def _validate_region(outer: Ring, holes: tuple[Ring, ...]) -> None:
    for hi, hole in enumerate(holes):
        pts = np.asarray(hole.vertices, dtype=float)
        par, bnd = _ring_hits(pts, outer.edges)
        if not np.all(par & ~bnd):
            raise ValueError(f"hole {hi} is not strictly inside the outer ring")
        for a1, a2 in hole.edges:
            for b1, b2 in outer.edges:
                if _closed_segments_intersect(tuple(a1), tuple(a2), tuple(b1), tuple(b2)):
                    raise ValueError(f"hole {hi} touches the outer ring")
    for hi in range(len(holes)):
        for hj in range(hi + 1, len(holes)):
            a, b = holes[hi], holes[hj]
            for a1, a2 in a.edges:
                for b1, b2 in b.edges:
                    if _closed_segments_intersect(tuple(a1), tuple(a2), tuple(b1), tuple(b2)):
                        raise ValueError(f"holes {hi} and {hj} overlap")
            par, bnd = _ring_hits(np.asarray(b.vertices[:1], dtype=float), a.edges)
            par2, bnd2 = _ring_hits(np.asarray(a.vertices[:1], dtype=float), b.edges)
            if (par[0] and not bnd[0]) or (par2[0] and not bnd2[0]):
                raise ValueError(f"holes {hi} and {hj} are nested")


@dataclass(frozen=True)
class Region:
    """Polygonal region: one outer ring minus the interiors of its holes."""

    outer: Ring
    holes: tuple[Ring, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "holes", tuple(self.holes))
        _validate_region(self.outer, self.holes)
        if region_area(self) <= 0.0:
            raise ValueError("region area is not positive (holes exceed outer ring)")

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        """All boundary edges (outer plus holes), shape (E, 2, 2)."""
        parts = [self.outer.edges] + [h.edges for h in self.holes]
        return np.concatenate(parts, axis=0)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return self.outer.bbox

    @property
    def area(self) -> float:
        return region_area(self)


def region_area(region: Region) -> float:
    """Outer ring area minus hole areas; strictly positive for a valid region."""
    area = ring_area(region.outer) - sum(ring_area(h) for h in region.holes)
    if area <= 0.0:
        raise ValueError("region area is not positive (holes exceed outer ring)")
    return area


def contains_many(region: Region, points) -> np.ndarray:
    """Vectorized containment test; see :func:`contains` for the convention."""
    pts = _as_point_array(points)
    xmin, ymin, xmax, ymax = region.bbox
    result = np.zeros(len(pts), dtype=bool)
    near = (
        (pts[:, 0] >= xmin - EPS)
        & (pts[:, 0] <= xmax + EPS)
        & (pts[:, 1] >= ymin - EPS)
        & (pts[:, 1] <= ymax + EPS)
    )
    if near.any():
        sub = pts[near]
        par, bnd = _ring_hits(sub, region.outer.edges)
        ok = par | bnd
        for hole in region.holes:
            hpar, hbnd = _ring_hits(sub, hole.edges)
            ok &= ~(hpar & ~hbnd)
        result[near] = ok
    return result


def contains(region: Region, point: Point) -> bool:
    """True iff ``point`` is inside the region.

    Inside means: in or on the outer ring, and not strictly inside any hole.
    Points on a hole edge therefore count as inside the region.
    """
    return bool(contains_many(region, [point])[0])


def segments_cross_boundary(region: Region, starts, ends) -> np.ndarray:
    """Vectorized version of :func:`segment_crosses_boundary`.

    ``starts`` and ``ends`` are (L, 2) arrays of segment endpoints; returns a
    boolean array of length L.
    """
    p1 = _as_point_array(starts)
    p2 = _as_point_array(ends)
    if p1.shape != p2.shape:
        raise ValueError("starts and ends must have the same shape")
    seg_len = np.hypot(p2[:, 0] - p1[:, 0], p2[:, 1] - p1[:, 1])
    if np.any(seg_len <= EPS):
        raise ValueError("degenerate segment: endpoints coincide")

    edges = region.boundary_edges
    q1 = edges[:, 0, :]
    q2 = edges[:, 1, :]
    dq = q2 - q1
    lq = np.hypot(dq[:, 0], dq[:, 1])

    out = np.zeros(len(p1), dtype=bool)
    for lo in range(0, len(p1), _SEGMENT_CHUNK):
        hi = lo + _SEGMENT_CHUNK
        a, b = p1[lo:hi], p2[lo:hi]
        dp = b - a
        lp = seg_len[lo:hi]
        # Perpendicular distances of each endpoint from the other segment's line.
        r1 = a[:, None, :] - q1[None, :, :]
        r2 = b[:, None, :] - q1[None, :, :]
        d1 = (dq[None, :, 0] * r1[:, :, 1] - dq[None, :, 1] * r1[:, :, 0]) / lq[None, :]
        d2 = (dq[None, :, 0] * r2[:, :, 1] - dq[None, :, 1] * r2[:, :, 0]) / lq[None, :]
        s1 = q1[None, :, :] - a[:, None, :]
        d3 = (dp[:, None, 0] * s1[:, :, 1] - dp[:, None, 1] * s1[:, :, 0]) / lp[:, None]
        s2 = q2[None, :, :] - a[:, None, :]
        d4 = (dp[:, None, 0] * s2[:, :, 1] - dp[:, None, 1] * s2[:, :, 0]) / lp[:, None]

        def sgn(d):
            s = np.sign(d)
            s[np.abs(d) <= EPS] = 0
            return s

        hit = (sgn(d1) * sgn(d2) < 0) & (sgn(d3) * sgn(d4) < 0)
        out[lo:hi] = hit.any(axis=1)
    return out


def segment_crosses_boundary(region: Region, a: Point, b: Point) -> bool:
    """True iff the open segment (a, b) properly crosses any boundary edge.

    Proper means a single transversal crossing interior to both segments;
    endpoint contact, grazing a boundary vertex, and running along an edge do
    not count. This lets links between boundary-coincident nodes survive while
    links that jump across land are caught.
    """
    return bool(segments_cross_boundary(region, [a], [b])[0])


# ---------------------------------------------------------------------------
# Region file input
# ---------------------------------------------------------------------------

def _ring_from_coords(coords: Sequence[Sequence[float]], where: str) -> Ring:
    pts = [(float(c[0]), float(c[1])) for c in coords]
    if len(pts) >= 2 and math.hypot(pts[0][0] - pts[-1][0], pts[0][1] - pts[-1][1]) <= EPS:
        pts = pts[:-1]  # GeoJSON rings repeat the first vertex; drop the closure
    try:
        return Ring(tuple(pts))
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from exc


def load_region_geojson(path) -> Region:
    """Load a Region from a GeoJSON Polygon (bare geometry, Feature, or
    single-feature FeatureCollection). First ring is the outer boundary,
    subsequent rings are holes."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    geom = doc
    if isinstance(geom, dict) and geom.get("type") == "FeatureCollection":
        feats = geom.get("features") or []
        polys = [f for f in feats if f.get("geometry", {}).get("type") == "Polygon"]
        if len(polys) != 1:
            raise ValueError(f"{path}: expected exactly one Polygon feature, found {len(polys)}")
        geom = polys[0]
    if isinstance(geom, dict) and geom.get("type") == "Feature":
        geom = geom.get("geometry") or {}
    if not isinstance(geom, dict) or geom.get("type") != "Polygon":
        raise ValueError(f"{path}: expected a GeoJSON Polygon geometry")
    rings = geom.get("coordinates") or []
    if not rings:
        raise ValueError(f"{path}: Polygon has no rings")
    outer = _ring_from_coords(rings[0], f"{path}: ring 0")
    holes = tuple(
        _ring_from_coords(r, f"{path}: ring {i}") for i, r in enumerate(rings[1:], start=1)
    )
    return Region(outer, holes)


def load_region_csv(path) -> Region:
    """Load a Region from CSV with columns ring_index,easting,northing.

    Ring index 0 is the outer boundary; higher indices are holes. A header
    row is detected and skipped automatically.
    """
    path = Path(path)
    rings: dict[int, list[Point]] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (row[0].strip().startswith("#")):
                continue
            try:
                idx = int(row[0])
                x, y = float(row[1]), float(row[2])
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header row
                raise ValueError(
                    f"{path}: line {lineno}: expected ring_index,easting,northing"
                ) from None
            rings.setdefault(idx, []).append((x, y))
    if 0 not in rings:
        raise ValueError(f"{path}: no ring with index 0 (outer boundary)")
    expected = set(range(len(rings)))
    if set(rings) != expected:
        raise ValueError(f"{path}: ring indices must be 0..{len(rings) - 1}")
    outer = _ring_from_coords(rings[0], f"{path}: ring 0")
    holes = tuple(
        _ring_from_coords(rings[i], f"{path}: ring {i}") for i in range(1, len(rings))
    )
    return Region(outer, holes)


def load_region(path) -> Region:
    """Load a region file, dispatching on extension (.csv vs GeoJSON)."""
    p = Path(path)
    if not p.exists():
        raise ValueError(f"region file not found: {p}")
    if p.suffix.lower() == ".csv":
        return load_region_csv(p)
    return load_region_geojson(p)
