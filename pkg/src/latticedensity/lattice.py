"""Node lattices inside polygonal regions.

A lattice is a set of nodes on a square grid clipped to a region, plus a
symmetric neighbor relation. Construction is split in two: generate the nodes,
then build the adjacency under a neighbor rule (8-compass grid links or a
distance band). Links whose straight segment crosses the region boundary are
pruned automatically, so a narrow spit of land severs the lattice the way it
severs the water.

Node ids are stable: removing a node tombstones it rather than renumbering,
so edit scripts and downstream references stay valid.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Region, contains_many, segments_cross_boundary

GRID8 = "grid8"


class DistanceBand(NamedTuple):
    """Neighbor rule linking all node pairs with lo <= distance <= hi."""

    lo: float
    hi: float


NeighborRule = Union[str, DistanceBand]


@dataclass(frozen=True)
class Lattice:
    """Immutable node lattice.

    coords: (n_slots, 2) array; the row index is the stable node id.
    active: boolean mask over slots; tombstoned nodes are False.
    adjacency: frozenset of (i, j) id pairs with i < j, both active.
    """

    coords: np.ndarray
    active: np.ndarray
    adjacency: frozenset
    spacing: float
    region_area: float

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        active = np.asarray(self.active, dtype=bool)
        if coords.ndim != 2 or coords.shape[1] != 2 or len(coords) != len(active):
            raise ValueError("coords must be (n, 2) and aligned with active mask")
        if not active.any():
            raise ValueError("lattice must contain at least one active node")
        pairs = []
        for i, j in self.adjacency:
            if i == j:
                raise ValueError(f"self-link ({i}, {i}) is not allowed")
            if not (active[i] and active[j]):
                raise ValueError(f"link ({i}, {j}) references an inactive node")
            pairs.append((min(i, j), max(i, j)))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "active", active)
        object.__setattr__(self, "adjacency", frozenset(pairs))
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.region_area <= 0:
            raise ValueError("region_area must be positive")

    @property
    def node_count(self) -> int:
        """Number of active (non-tombstoned) nodes."""
        return int(self.active.sum())

    def active_ids(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    def degrees(self) -> np.ndarray:
        """Degree per slot; tombstoned slots report 0."""
        deg = np.zeros(len(self.coords), dtype=int)
        for i, j in self.adjacency:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbor_map(self) -> dict[int, list[int]]:
        nbrs: dict[int, list[int]] = {int(i): [] for i in self.active_ids()}
        for i, j in self.adjacency:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return {i: sorted(v) for i, v in nbrs.items()}


def generate_nodes(region: Region, spacing: float) -> Lattice:
    """Fill the region with a square grid of nodes.

    The grid is anchored at the lower-left corner of the region's bounding box
    (no random offset) and clipped by containment. Ids run row-major: south to
    north, west to east within a row. The returned lattice has no links yet.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    xmin, ymin, xmax, ymax = region.bbox
    nx = int(np.floor((xmax - xmin) / spacing + 1e-9)) + 1
    ny = int(np.floor((ymax - ymin) / spacing + 1e-9)) + 1
    xs = xmin + spacing * np.arange(nx)
    ys = ymin + spacing * np.arange(ny)
    gx, gy = np.meshgrid(xs, ys)  # row-major: y varies along axis 0
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    mask = contains_many(region, pts)
    coords = pts[mask]
    if len(coords) == 0:
        raise ValueError("region too small for spacing: no grid node falls inside")
    return Lattice(
        coords=coords,
        active=np.ones(len(coords), dtype=bool),
        adjacency=frozenset(),
        spacing=float(spacing),
        region_area=region.area,
    )


def _grid8_pairs(lat: Lattice) -> list[tuple[int, int]]:
    ids = lat.active_ids()
    coords = lat.coords[ids]
    s = lat.spacing
    x0 = coords[:, 0].min()
    y0 = coords[:, 1].min()
    ix = np.rint((coords[:, 0] - x0) / s).astype(int)
    iy = np.rint((coords[:, 1] - y0) / s).astype(int)
    cell = {(int(a), int(b)): int(i) for a, b, i in zip(ix, iy, ids)}
    pairs = []
    # Half of the 8 compass offsets; the unordered pair covers the rest.
    for dx, dy in ((1, 0), (0, 1), (1, 1), (1, -1)):
        for a, b, i in zip(ix, iy, ids):
            j = cell.get((int(a) + dx, int(b) + dy))
            if j is not None:
                pairs.append((min(int(i), j), max(int(i), j)))
    return pairs


def _band_pairs(lat: Lattice, lo: float, hi: float) -> list[tuple[int, int]]:
    if hi < lo:
        raise ValueError(f"distance band upper bound {hi} is below lower bound {lo}")
    if lo < 0:
        raise ValueError("distance band bounds must be nonnegative")
    ids = lat.active_ids()
    coords = lat.coords[ids]
    tree = cKDTree(coords)
    cand = tree.query_pairs(hi * (1.0 + 1e-12), output_type="ndarray")
    if len(cand) == 0:
        return []
    d = np.hypot(
        coords[cand[:, 0], 0] - coords[cand[:, 1], 0],
        coords[cand[:, 0], 1] - coords[cand[:, 1], 1],
    )
    keep = (d >= lo) & (d <= hi)
    out = []
    for a, b in cand[keep]:
        i, j = int(ids[a]), int(ids[b])
        out.append((min(i, j), max(i, j)))
    return out


def build_adjacency(lat: Lattice, region: Region, rule: NeighborRule = GRID8) -> Lattice:
    """Build the neighbor relation under ``rule`` and prune boundary crossers.

    ``grid8`` links each node to the node one grid step away in each of the
    eight compass directions (axis neighbors at the spacing, diagonals at
    spacing * sqrt(2)). ``DistanceBand(lo, hi)`` links all pairs whose
    distance lies in [lo, hi]. In both cases a link whose segment properly
    crosses the region boundary is dropped.
    """
    if rule == GRID8:
        pairs = _grid8_pairs(lat)
    elif isinstance(rule, DistanceBand):
        pairs = _band_pairs(lat, float(rule.lo), float(rule.hi))
    else:
        raise ValueError(f"unknown neighbor rule: {rule!r}")
    pairs = sorted(set(pairs))
    if pairs:
        arr = np.asarray(pairs, dtype=int)
        crossing = segments_cross_boundary(
            region, lat.coords[arr[:, 0]], lat.coords[arr[:, 1]]
        )
        pairs = [p for p, bad in zip(pairs, crossing) if not bad]
    return Lattice(
        coords=lat.coords,
        active=lat.active,
        adjacency=frozenset(pairs),
        spacing=lat.spacing,
        region_area=lat.region_area,
    )


# ---------------------------------------------------------------------------
# Declarative edits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EditCommand:
    op: str  # "addlink" | "removelink" | "removenode"
    i: int
    j: int | None = None

    def __str__(self) -> str:
        if self.j is None:
            return f"{self.op} {self.i}"
        return f"{self.op} {self.i} {self.j}"


@dataclass(frozen=True)
class EditScript:
    """Ordered list of lattice edits, replacing interactive hand-editing."""

    commands: tuple[EditCommand, ...]

    def __len__(self) -> int:
        return len(self.commands)


def parse_edit_script(text: str, source: str = "<string>") -> EditScript:
    """Parse an edit script: one command per line, `#` starts a comment.

    Commands: ``addlink I J``, ``removelink I J``, ``removenode I`` with
    0-based node ids.
    """
    commands = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0].lower()
        try:
            if op in ("addlink", "removelink"):
                if len(parts) != 3:
                    raise ValueError("expected two node ids")
                commands.append(EditCommand(op, int(parts[1]), int(parts[2])))
            elif op == "removenode":
                if len(parts) != 2:
                    raise ValueError("expected one node id")
                commands.append(EditCommand(op, int(parts[1])))
            else:
                raise ValueError(f"unknown command {op!r}")
        except ValueError as exc:
            raise ValueError(f"{source}: line {lineno}: {exc}") from None
    return EditScript(tuple(commands))


def load_edit_script(path) -> EditScript:
    path = Path(path)
    if not path.exists():
        raise ValueError(f"edit script not found: {path}")
    return parse_edit_script(path.read_text(), source=str(path))


def apply_edits(lat: Lattice, script: EditScript) -> Lattice:
    """Apply an edit script in order and return the edited lattice.

    ``removenode`` tombstones the node (ids are stable) and drops its links.
    Errors name the offending command index.
    """
    active = lat.active.copy()
    links = {tuple(p) for p in lat.adjacency}

    def fail(idx, cmd, msg):
        raise ValueError(f"edit command {idx} ({cmd}): {msg}")

    for idx, cmd in enumerate(script.commands):
        i, j = cmd.i, cmd.j
        if i < 0 or i >= len(active) or not active[i]:
            fail(idx, cmd, f"node {i} does not exist")
        if cmd.op == "removenode":
            active[i] = False
            links = {p for p in links if i not in p}
            continue
        if j is None or j < 0 or j >= len(active) or not active[j]:
            fail(idx, cmd, f"node {j} does not exist")
        if i == j:
            fail(idx, cmd, "a node cannot be linked to itself")
        pair = (min(i, j), max(i, j))
        if cmd.op == "addlink":
            if pair in links:
                fail(idx, cmd, "link already present")
            links.add(pair)
        elif cmd.op == "removelink":
            if pair not in links:
                fail(idx, cmd, "link does not exist")
            links.remove(pair)
        else:
            fail(idx, cmd, f"unknown op {cmd.op!r}")
    return Lattice(
        coords=lat.coords,
        active=active,
        adjacency=frozenset(links),
        spacing=lat.spacing,
        region_area=lat.region_area,
    )


# ---------------------------------------------------------------------------
# Connectivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConnectivityReport:
    """Connected components (sorted by smallest member id) and isolated nodes."""

    components: tuple[tuple[int, ...], ...]
    isolated: tuple[int, ...]

    @property
    def component_count(self) -> int:
        return len(self.components)


def connectivity_report(lat: Lattice) -> ConnectivityReport:
    """Connected components of the active lattice via breadth-first traversal."""
    nbrs = lat.neighbor_map()
    seen: set[int] = set()
    components = []
    for start in sorted(nbrs):
        if start in seen:
            continue
        comp = []
        queue = deque([start])
        seen.add(start)
        while queue:
            u = queue.popleft()
            comp.append(u)
            for v in nbrs[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        components.append(tuple(sorted(comp)))
    components.sort(key=lambda c: c[0])
    deg = lat.degrees()
    isolated = tuple(int(i) for i in lat.active_ids() if deg[i] == 0)
    return ConnectivityReport(tuple(components), isolated)


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def write_nodes_csv(lat: Lattice, path) -> None:
    deg = lat.degrees()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "easting", "northing", "degree"])
        for i in lat.active_ids():
            w.writerow([int(i), f"{lat.coords[i, 0]:.12g}", f"{lat.coords[i, 1]:.12g}", int(deg[i])])


def write_links_csv(lat: Lattice, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j"])
        for i, j in sorted(lat.adjacency):
            w.writerow([i, j])
