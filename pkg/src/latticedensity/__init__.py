"""Density and home-range estimation on lattices confined to polygonal regions.

The estimator fills a region (polygon with optional holes) with a grid of
nodes, links neighboring nodes into a lattice that respects the boundary, and
diffuses the observed point pattern by a symmetric random walk. The walk
length, selected by unbiased cross-validation, plays the role of a kernel
bandwidth, while the lattice keeps all density inside the region. A standard
bivariate Gaussian KDE baseline and a simulation harness for comparing the
two are included.
"""

__version__ = "0.1.0"

from .crossval import (
    ObservationAssignment,
    UCVTrace,
    assign_observations,
    select_k,
    ucv_bruteforce,
    ucv_scan,
)
from .diffusion import (
    DensityField,
    ProbabilityVector,
    TransitionOperator,
    build_operator,
    evolve,
    evolve_columns,
    to_density,
)
from .estimator import (
    DensityRaster,
    EstimateResult,
    HomeRange,
    estimate,
    grid_export,
    home_range,
    load_observations_csv,
)
from .geometry import (
    Region,
    Ring,
    contains,
    contains_many,
    load_region,
    region_area,
    ring_area,
    segment_crosses_boundary,
)
from .kernel_baseline import KdeModel, fit_ucv, kde_evaluate, select_bandwidth_ucv
from .lattice import (
    GRID8,
    ConnectivityReport,
    DistanceBand,
    EditCommand,
    EditScript,
    Lattice,
    apply_edits,
    build_adjacency,
    connectivity_report,
    generate_nodes,
    load_edit_script,
    parse_edit_script,
)
from .sim import IseReport, SimulationConfig, ise, mvn_pdf, run_comparison, sample_mvn

__all__ = [
    "__version__",
    "ObservationAssignment",
    "UCVTrace",
    "assign_observations",
    "select_k",
    "ucv_bruteforce",
    "ucv_scan",
    "DensityField",
    "ProbabilityVector",
    "TransitionOperator",
    "build_operator",
    "evolve",
    "evolve_columns",
    "to_density",
    "DensityRaster",
    "EstimateResult",
    "HomeRange",
    "estimate",
    "grid_export",
    "home_range",
    "load_observations_csv",
    "Region",
    "Ring",
    "contains",
    "contains_many",
    "load_region",
    "region_area",
    "ring_area",
    "segment_crosses_boundary",
    "KdeModel",
    "fit_ucv",
    "kde_evaluate",
    "select_bandwidth_ucv",
    "GRID8",
    "ConnectivityReport",
    "DistanceBand",
    "EditCommand",
    "EditScript",
    "Lattice",
    "apply_edits",
    "build_adjacency",
    "connectivity_report",
    "generate_nodes",
    "load_edit_script",
    "parse_edit_script",
    "IseReport",
    "SimulationConfig",
    "ise",
    "mvn_pdf",
    "run_comparison",
    "sample_mvn",
]
