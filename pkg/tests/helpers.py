"""Independent oracles and generators shared across the test suite.

Everything here deliberately avoids the production code paths it checks:
winding-number containment instead of ray casting, parametric segment
intersection instead of orientation signs, dense matrix powers instead of
sparse products, and exhaustive subset search instead of the greedy rule.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from latticedensity.lattice import GRID8, Lattice, build_adjacency, connectivity_report, generate_nodes
from latticedensity.fixtures import blob_region


# ---------------------------------------------------------------------------
# Winding-number containment oracle
# ---------------------------------------------------------------------------

def winding_inside_ring(pts: np.ndarray, vertices) -> np.ndarray:
    """Strict interior test by winding number; off-boundary points only."""
    v = np.asarray(vertices, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    wn = np.zeros(len(pts), dtype=int)
    n = len(v)
    for i in range(n):
        ax, ay = v[i]
        bx, by = v[(i + 1) % n]
        is_left = (bx - ax) * (y - ay) - (x - ax) * (by - ay)
        up = (ay <= y) & (by > y) & (is_left > 0)
        down = (ay > y) & (by <= y) & (is_left < 0)
        wn += up.astype(int)
        wn -= down.astype(int)
    return wn != 0


def winding_inside_region(pts: np.ndarray, region) -> np.ndarray:
    ok = winding_inside_ring(pts, region.outer.vertices)
    for hole in region.holes:
        ok &= ~winding_inside_ring(pts, hole.vertices)
    return ok


def min_edge_distance(pts: np.ndarray, region) -> np.ndarray:
    """Distance from each point to the nearest boundary edge (oracle-side)."""
    best = np.full(len(pts), np.inf)
    for ring in (region.outer, *region.holes):
        v = np.asarray(ring.vertices, dtype=float)
        n = len(v)
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            d = b - a
            L2 = d @ d
            t = np.clip(((pts - a) @ d) / L2, 0.0, 1.0)
            proj = a + t[:, None] * d
            best = np.minimum(best, np.hypot(*(pts - proj).T))
    return best


# ---------------------------------------------------------------------------
# Parametric segment intersection oracle
# ---------------------------------------------------------------------------

def parametric_proper_cross(p1, p2, q1, q2) -> bool:
    """Solve for the intersection parameters; proper iff both lie strictly
    inside (0, 1)."""
    p1 = np.asarray(p1, float)
    r = np.asarray(p2, float) - p1
    q1 = np.asarray(q1, float)
    s = np.asarray(q2, float) - q1
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-14 * (np.hypot(*r) * np.hypot(*s)):
        return False  # parallel or collinear: never a proper crossing
    w = q1 - p1
    t = (w[0] * s[1] - w[1] * s[0]) / denom
    u = (w[0] * r[1] - w[1] * r[0]) / denom
    return 0.0 < t < 1.0 and 0.0 < u < 1.0


def naive_crosses_boundary(region, a, b) -> bool:
    """Edge-by-edge O(E) proper-crossing oracle."""
    for ring in (region.outer, *region.holes):
        v = ring.vertices
        n = len(v)
        for i in range(n):
            if parametric_proper_cross(a, b, v[i], v[(i + 1) % n]):
                return True
    return False


# ---------------------------------------------------------------------------
# Dense transition operator oracle
# ---------------------------------------------------------------------------

def dense_operator(lat: Lattice, mobility: float) -> np.ndarray:
    """Dense transition matrix built directly from the lattice definition."""
    ids = lat.active_ids()
    index = {int(i): r for r, i in enumerate(ids)}
    n = len(ids)
    deg = np.zeros(n, dtype=int)
    for i, j in lat.adjacency:
        deg[index[i]] += 1
        deg[index[j]] += 1
    q_max = max(int(deg.max()), 1)
    T = np.zeros((n, n))
    off = mobility / q_max
    for i, j in lat.adjacency:
        a, b = index[i], index[j]
        T[a, b] = off
        T[b, a] = off
    for r in range(n):
        T[r, r] = 1.0 - deg[r] * off
    return T


# ---------------------------------------------------------------------------
# Lattice generators
# ---------------------------------------------------------------------------

def random_grid_lattice(seed: int, mean_radius: float = 8.0, spacing: float = 1.0) -> Lattice:
    """Connected grid8 lattice over a random blob; retries seeds until connected."""
    for attempt in range(20):
        region = blob_region(seed + 1000 * attempt, mean_radius=mean_radius)
        lat = generate_nodes(region, spacing)
        lat = build_adjacency(lat, region, GRID8)
        if connectivity_report(lat).component_count == 1:
            return lat
    raise RuntimeError("could not build a connected random lattice")


def random_hand_lattice(seed: int, n: int, extra_links: int = 5) -> Lattice:
    """Connected lattice with arbitrary coordinates and a random tree plus
    extra links; exercises irregular degree patterns."""
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, 10.0, size=(n, 2))
    links = set()
    order = rng.permutation(n)
    for i in range(1, n):
        j = order[rng.integers(0, i)]
        a, b = int(order[i]), int(j)
        links.add((min(a, b), max(a, b)))
    for _ in range(extra_links):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            links.add((min(int(a), int(b)), max(int(a), int(b))))
    return Lattice(
        coords=coords,
        active=np.ones(n, dtype=bool),
        adjacency=frozenset(links),
        spacing=1.0,
        region_area=float(rng.uniform(2.0, 50.0)),
    )


# ---------------------------------------------------------------------------
# Miscellaneous oracles
# ---------------------------------------------------------------------------

def matches_truncated(value: float, printed: float, decimals: int = 4, slack: float = 5e-5) -> bool:
    """True if ``value`` truncates to the printed figure or sits within slack."""
    scale = 10 ** decimals
    truncated = math.floor(value * scale) / scale
    return abs(truncated - printed) < 1e-12 or abs(value - printed) <= slack


def exhaustive_min_cardinality(p: np.ndarray, target: float) -> int:
    """Smallest subset size whose probabilities total at least target."""
    n = len(p)
    for m in range(1, n + 1):
        for combo in itertools.combinations(range(n), m):
            if p[list(combo)].sum() >= target:
                return m
    raise AssertionError("target not reachable")
