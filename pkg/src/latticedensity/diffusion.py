"""Random-walk diffusion on a lattice.

The one-step transition operator T moves probability mass between neighboring
nodes: a walk at node i stays put with probability 1 - M * q_i / Q and moves
to each neighbor with probability M / Q, where q_i is the node's degree, Q is
the maximum degree over the lattice, and M in (0, 1] is the mobility. Using
the global Q makes every move probability identical, so T is symmetric and
row-stochastic, mass diffuses at the same rate everywhere, and on a connected
lattice the walk converges to the uniform distribution.

Evolving an initial distribution k steps (repeated sparse matrix-vector
products; T^k is never formed) and rescaling by N / area turns node
probabilities into a density estimate over the region.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .lattice import Lattice


@dataclass(frozen=True)
class TransitionOperator:
    """Sparse symmetric row-stochastic one-step operator over active nodes.

    ``node_ids[r]`` is the lattice node id behind vector index r; vectors and
    matrices in this module are always in this active-id order.
    """

    matrix: sparse.csr_matrix
    mobility: float
    max_degree: int
    node_ids: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def index_of(self, node_id: int) -> int:
        idx = np.searchsorted(self.node_ids, node_id)
        if idx >= len(self.node_ids) or self.node_ids[idx] != node_id:
            raise ValueError(f"node id {node_id} is not in the operator")
        return int(idx)


@dataclass(frozen=True)
class ProbabilityVector:
    """Nonnegative vector summing to 1; ``step`` counts diffusion steps taken."""

    values: np.ndarray
    step: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise ValueError("probability vector must be one-dimensional")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("probabilities must be finite and nonnegative")
        total = float(v.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")


@dataclass(frozen=True)
class DensityField:
    """Per-node density view of a probability vector: f(s_i) = (N / area) p_i."""

    values: np.ndarray
    p: ProbabilityVector
    region_area: float
    node_ids: np.ndarray

    def __post_init__(self):
        cell = self.region_area / len(self.values)
        if abs(float(self.values.sum()) * cell - 1.0) > 1e-10:
            raise ValueError("density does not integrate to 1 over the node cells")


def build_operator(lat: Lattice, mobility: float = 0.5) -> TransitionOperator:
    """Assemble the transition operator for a lattice.

    Raises if mobility is outside (0, 1] or if a multi-node lattice has no
    links at all (the walk could never move).
    """
    if not (0.0 < mobility <= 1.0):
        raise ValueError(f"mobility must be in (0, 1], got {mobility}")
    ids = lat.active_ids()
    n = len(ids)
    deg_by_slot = lat.degrees()
    degrees = deg_by_slot[ids]
    q_max = int(degrees.max())
    if n == 1:
        matrix = sparse.csr_matrix(np.array([[1.0]]))
        return TransitionOperator(matrix, float(mobility), max(q_max, 0), ids)
    if q_max == 0:
        raise ValueError("no links: every node is isolated")

    index = {int(node): r for r, node in enumerate(ids)}
    off = mobility / q_max
    rows = list(range(n))
    cols = list(range(n))
    vals = [1.0 - degrees[r] * off for r in range(n)]
    for i, j in sorted(lat.adjacency):
        a, b = index[i], index[j]
        rows.extend((a, b))
        cols.extend((b, a))
        vals.extend((off, off))
    matrix = sparse.csr_matrix(
        (np.array(vals), (np.array(rows), np.array(cols))), shape=(n, n)
    )
    return TransitionOperator(matrix, float(mobility), q_max, ids)


def evolve(op: TransitionOperator, p0: ProbabilityVector, k: int) -> ProbabilityVector:
    """Apply the operator k times to p0 via sparse matrix-vector products."""
    if k < 0:
        raise ValueError("step count must be nonnegative")
    v = np.asarray(p0.values, dtype=float)
    if len(v) != op.n:
        raise ValueError(f"vector length {len(v)} does not match operator size {op.n}")
    for _ in range(k):
        v = op.matrix @ v
    return ProbabilityVector(v, step=k)


def evolve_columns(op: TransitionOperator, node_ids, k: int) -> np.ndarray:
    """Columns of T^k for the requested node ids.

    Returns an (N, m) array whose column c is T^k applied to the unit mass at
    ``node_ids[c]``. By symmetry this is also row c of T^k, so its entry at
    the node's own index is the k-step return probability used by the
    leave-one-out computation.
    """
    if k < 0:
        raise ValueError("step count must be nonnegative")
    idx = [op.index_of(int(i)) for i in node_ids]
    cols = np.zeros((op.n, len(idx)))
    cols[idx, np.arange(len(idx))] = 1.0
    for _ in range(k):
        cols = op.matrix @ cols
    return cols


def to_density(p: ProbabilityVector, lat: Lattice) -> DensityField:
    """Convert node probabilities to densities: f(s_i) = (N / area) p_i."""
    ids = lat.active_ids()
    if len(p.values) != len(ids):
        raise ValueError("probability vector does not match the lattice")
    scale = len(ids) / lat.region_area
    return DensityField(p.values * scale, p, lat.region_area, ids)


def write_operator_csv(op: TransitionOperator, path) -> None:
    """Dense debug dump of the operator, row-major, 12 significant digits."""
    dense = op.matrix.toarray()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in dense:
            w.writerow([f"{x:.12g}" for x in row])


def write_density_csv(field: DensityField, lat: Lattice, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "easting", "northing", "p", "density"])
        for r, i in enumerate(field.node_ids):
            w.writerow(
                [
                    int(i),
                    f"{lat.coords[i, 0]:.12g}",
                    f"{lat.coords[i, 1]:.12g}",
                    f"{field.p.values[r]:.12g}",
                    f"{field.values[r]:.12g}",
                ]
            )
