"""End-to-end lattice density estimation.

Chains the pipeline: generate nodes inside the region, build and optionally
edit the neighbor structure, assemble the transition operator, pick the walk
length by cross-validation (or honor a fixed k), and convert the evolved
probabilities into a density field. Also extracts minimal-area home ranges
and rasterizes node densities for plotting.
"""

from __future__ import annotations

import csv
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .crossval import (
    ObservationAssignment,
    UCVTrace,
    assign_observations,
    ucv_scan,
)
from .diffusion import (
    DensityField,
    TransitionOperator,
    build_operator,
    evolve,
    to_density,
)
from .geometry import Region, contains_many
from .lattice import (
    GRID8,
    EditScript,
    Lattice,
    NeighborRule,
    apply_edits,
    build_adjacency,
    connectivity_report,
    generate_nodes,
)


@dataclass
class EstimateResult:
    """Everything produced by one estimation run."""

    region: Region
    lattice: Lattice
    operator: TransitionOperator
    assignment: ObservationAssignment
    density: DensityField
    k_used: int
    trace: UCVTrace | None = None
    warnings: list[str] = field(default_factory=list)


def estimate(
    region: Region,
    observations,
    spacing: float,
    mobility: float = 0.5,
    rule: NeighborRule = GRID8,
    edits: EditScript | None = None,
    k: int | str = "auto",
    k_max: int = 1000,
    window: int = 30,
) -> EstimateResult:
    """Run the full pipeline and return the density estimate.

    ``k`` is either a fixed step count or ``"auto"`` to minimize the UCV
    criterion (needs at least two observations). A disconnected lattice is
    allowed: the run proceeds with a warning naming the component count, and
    mass stays confined to the components holding observations.
    """
    lat = generate_nodes(region, spacing)
    lat = build_adjacency(lat, region, rule)
    if edits is not None and len(edits):
        lat = apply_edits(lat, edits)
    op = build_operator(lat, mobility)
    assign = assign_observations(observations, lat)

    warn: list[str] = []
    trace = None
    if k == "auto":
        report = connectivity_report(lat)
        if report.component_count > 1:
            msg = (
                f"lattice is disconnected ({report.component_count} components); "
                "the uniform limit applies per component"
            )
            warn.append(msg)
            _warnings.warn(msg)
        trace = ucv_scan(op, assign, lat, k_max=k_max, window=window)
        k_used = trace.k_star
        if trace.at_edge:
            msg = f"minimum UCV at scan edge (k = {k_used}); consider raising k_max"
            warn.append(msg)
            _warnings.warn(msg)
    else:
        k_used = int(k)
        if k_used < 0:
            raise ValueError("k must be nonnegative")

    p_k = evolve(op, assign.p0, k_used)
    density = to_density(p_k, lat)
    return EstimateResult(
        region=region,
        lattice=lat,
        operator=op,
        assignment=assign,
        density=density,
        k_used=k_used,
        trace=trace,
        warnings=warn,
    )


@dataclass(frozen=True)
class HomeRange:
    """Minimal-cardinality node set whose probability reaches the target P.

    Every node cell has the same area (region area / N), so minimal node
    count is minimal area.
    """

    node_ids: frozenset
    coverage: float
    achieved: float
    area: float


def home_range(result: EstimateResult, coverage: float) -> HomeRange:
    """Smallest node set with total probability >= coverage.

    Nodes are taken in decreasing probability order (ties to the smaller id);
    the greedy prefix is minimal because any same-size set has no larger
    total. Stops exactly when the target is first reached, so dropping the
    weakest included node falls below P.
    """
    if not (0.0 < coverage < 1.0):
        raise ValueError(f"coverage target must be in (0, 1), got {coverage}")
    p = result.density.p.values
    ids = result.density.node_ids
    order = np.lexsort((ids, -p))
    total = 0.0
    chosen = []
    for r in order:
        chosen.append(int(ids[r]))
        total += float(p[r])
        if total >= coverage:
            break
    n_nodes = len(p)
    cell_area = result.density.region_area / n_nodes
    return HomeRange(
        node_ids=frozenset(chosen),
        coverage=float(coverage),
        achieved=total,
        area=len(chosen) * cell_area,
    )


@dataclass(frozen=True)
class DensityRaster:
    """Gridded density over the region bounding box.

    values[0] is the northernmost row (plot order); cells outside the region
    hold NaN and export as ``NA``.
    """

    values: np.ndarray
    x_centers: np.ndarray
    y_centers: np.ndarray  # descending, aligned with rows
    cell_area: float


def grid_export(result: EstimateResult, resolution) -> DensityRaster:
    """Rasterize node densities over the region bounding box.

    ``resolution`` is the cell count per axis (an int, or an (nx, ny) pair).
    Each cell takes the density of the node nearest its center when the
    center lies inside the region; nearest-node assignment preserves the
    discrete estimator rather than interpolating it.
    """
    if isinstance(resolution, (tuple, list)):
        nx, ny = int(resolution[0]), int(resolution[1])
    else:
        nx = ny = int(resolution)
    if nx < 2 or ny < 2:
        raise ValueError("raster resolution must be at least 2 cells per axis")
    xmin, ymin, xmax, ymax = result.region.bbox
    dx = (xmax - xmin) / nx
    dy = (ymax - ymin) / ny
    x_centers = xmin + dx * (np.arange(nx) + 0.5)
    y_centers = ymin + dy * (np.arange(ny) + 0.5)

    gx, gy = np.meshgrid(x_centers, y_centers)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    inside = contains_many(result.region, pts)

    ids = result.density.node_ids
    tree = cKDTree(result.lattice.coords[ids])
    values = np.full(len(pts), np.nan)
    if inside.any():
        _, nearest = tree.query(pts[inside])
        values[inside] = result.density.values[nearest]
    grid = values.reshape(ny, nx)[::-1, :]  # north first
    return DensityRaster(
        values=grid,
        x_centers=x_centers,
        y_centers=y_centers[::-1],
        cell_area=dx * dy,
    )


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def load_observations_csv(path) -> np.ndarray:
    """Read observations from CSV with columns easting,northing.

    A header row is detected and skipped automatically.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header
                raise ValueError(
                    f"{path}: line {lineno}: expected easting,northing"
                ) from None
    if not rows:
        raise ValueError(f"{path}: no observations found")
    return np.asarray(rows, dtype=float)


def write_homerange_csv(hr: HomeRange, result: EstimateResult, path) -> None:
    ids = result.density.node_ids
    index = {int(i): r for r, i in enumerate(ids)}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "easting", "northing", "p"])
        for i in sorted(hr.node_ids):
            r = index[i]
            w.writerow(
                [
                    i,
                    f"{result.lattice.coords[i, 0]:.12g}",
                    f"{result.lattice.coords[i, 1]:.12g}",
                    f"{result.density.p.values[r]:.12g}",
                ]
            )


def write_homerange_summary_csv(hr: HomeRange, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["P", "achieved", "node_count", "area"])
        w.writerow(
            [
                f"{hr.coverage:.12g}",
                f"{hr.achieved:.12g}",
                len(hr.node_ids),
                f"{hr.area:.12g}",
            ]
        )


def write_raster_csv(raster: DensityRaster, path) -> None:
    """Plain CSV matrix, rows north to south, NA for cells outside the region."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in raster.values:
            w.writerow(["NA" if np.isnan(v) else f"{v:.12g}" for v in row])
