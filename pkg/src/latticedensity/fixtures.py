"""Built-in fixture scenarios.

Small, fully deterministic inputs used by the test suite and handy for
experimenting: a six-node lattice whose transition matrix can be checked by
hand, a causeway region where a barrier nearly bisects a square, and random
blob regions for property tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Region, Ring
from .lattice import (
    GRID8,
    EditCommand,
    EditScript,
    Lattice,
    apply_edits,
    build_adjacency,
    generate_nodes,
)

# Hand-checkable six-node lattice: degrees (3, 3, 4, 4, 3, 1), max degree 4.
SIX_NODE_LINKS = (
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 2),
    (1, 3),
    (2, 3),
    (2, 4),
    (3, 4),
    (4, 5),
)

_SIX_NODE_COORDS = (
    (0.0, 1.0),
    (0.0, 0.0),
    (1.0, 1.0),
    (1.0, 0.0),
    (2.0, 0.0),
    (3.0, 0.0),
)


def six_node_lattice() -> Lattice:
    """Six nodes, nine bidirectional links; small enough to verify every
    transition matrix entry by hand. Area is set to 6 so each node cell has
    unit area."""
    return Lattice(
        coords=np.asarray(_SIX_NODE_COORDS, dtype=float),
        active=np.ones(6, dtype=bool),
        adjacency=frozenset(SIX_NODE_LINKS),
        spacing=1.0,
        region_area=6.0,
    )


def six_node_region() -> tuple[Region, float]:
    """A tapered polygon that, at spacing 1, admits exactly the six grid
    points of the hand fixture and reproduces its nine links under the
    8-compass rule (up to node renumbering).

    Returns (region, spacing). Generated ids are row-major, so the node at
    (0, 1) in the hand fixture becomes generated id 4, and so on; match nodes
    by coordinates when comparing.
    """
    outer = Ring(
        (
            (0.0, 0.0),
            (3.0, 0.0),
            (3.0, 0.2),
            (2.1, 0.2),
            (1.1, 1.0),
            (0.0, 1.0),
        )
    )
    return Region(outer), 1.0


def causeway_region() -> Region:
    """Unit square with a thin barrier rising from the south shore to
    y = 0.8 at easting 0.5, leaving an opening across the top fifth."""
    outer = Ring(
        (
            (0.0, 0.0),
            (0.495, 0.0),
            (0.495, 0.8),
            (0.505, 0.8),
            (0.505, 0.0),
            (1.0, 0.0),
            (1.0, 1.0),
            (0.0, 1.0),
        )
    )
    return Region(outer)


@dataclass(frozen=True)
class CausewayFixture:
    region: Region
    lattice: Lattice
    observations: np.ndarray
    severed: bool
    spacing: float
    edit_script: EditScript | None = None
    barrier_easting: float = 0.5

    def west_ids(self) -> np.ndarray:
        ids = self.lattice.active_ids()
        return ids[self.lattice.coords[ids, 0] < self.barrier_easting]

    def east_ids(self) -> np.ndarray:
        ids = self.lattice.active_ids()
        return ids[self.lattice.coords[ids, 0] > self.barrier_easting]


def causeway_fixture(
    spacing: float = 0.04,
    n_obs: int = 80,
    seed: int = 1105,
    severed: bool = False,
) -> CausewayFixture:
    """Causeway scenario: points uniform west of the barrier.

    The barrier prunes every east-west link below its top, so mass can reach
    the east side only through the opening. With ``severed=True`` the
    remaining links across the barrier line are removed as well, leaving two
    components.
    """
    region = causeway_region()
    lat = generate_nodes(region, spacing)
    lat = build_adjacency(lat, region, GRID8)
    script = None
    if severed:
        crossers = [
            (i, j)
            for i, j in sorted(lat.adjacency)
            if (lat.coords[i, 0] - 0.5) * (lat.coords[j, 0] - 0.5) < 0
        ]
        script = EditScript(tuple(EditCommand("removelink", i, j) for i, j in crossers))
        lat = apply_edits(lat, script)
    rng = np.random.default_rng(seed)
    obs = np.column_stack(
        [rng.uniform(0.0, 0.49, size=n_obs), rng.uniform(0.0, 1.0, size=n_obs)]
    )
    return CausewayFixture(
        region=region,
        lattice=lat,
        observations=obs,
        severed=severed,
        spacing=spacing,
        edit_script=script,
    )


def blob_region(
    seed: int,
    n_vertices: int = 12,
    mean_radius: float = 1.0,
    radial_jitter: float = 0.25,
    center: tuple[float, float] = (0.0, 0.0),
) -> Region:
    """Random star-shaped polygon around ``center``; simple by construction."""
    rng = np.random.default_rng(seed)
    while True:
        angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n_vertices))
        if np.min(np.diff(angles, append=angles[0] + 2.0 * np.pi)) > 1e-2:
            break
    radii = mean_radius * rng.uniform(1.0 - radial_jitter, 1.0 + radial_jitter, n_vertices)
    xs = center[0] + radii * np.cos(angles)
    ys = center[1] + radii * np.sin(angles)
    return Region(Ring(tuple(zip(xs, ys))))


def lake_region(
    seed: int = 7,
    mean_radius: float = 4000.0,
    n_vertices: int = 28,
    island: bool = True,
) -> Region:
    """Synthetic lake: an irregular shoreline, optionally with an island hole.

    At 200 m node spacing a radius of 4000 m yields roughly a thousand nodes;
    8000 m yields about five thousand.
    """
    rng = np.random.default_rng(seed)
    while True:
        angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n_vertices))
        if np.min(np.diff(angles, append=angles[0] + 2.0 * np.pi)) > 1e-2:
            break
    radii = mean_radius * rng.uniform(0.72, 1.28, n_vertices)
    xs = radii * np.cos(angles)
    ys = radii * np.sin(angles)
    outer = Ring(tuple(zip(xs, ys)))
    holes = ()
    if island:
        r_isl = 0.12 * mean_radius
        cx, cy = 0.3 * mean_radius, -0.2 * mean_radius
        t = np.linspace(0.0, 2.0 * np.pi, 10, endpoint=False)
        holes = (
            Ring(tuple(zip(cx + r_isl * np.cos(t), cy + r_isl * np.sin(t)))),
        )
    return Region(outer, holes)
