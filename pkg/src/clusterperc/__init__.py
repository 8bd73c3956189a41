"""Percolation engine for cluster-state generation with atomic memories."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .lattice import (
    ContractedGraph,
    Geometry,
    Lattice,
    build_lattice,
    contract_transparent,
    dilute_sites,
)
from .percolation import (
    CanonicalCurve,
    MicrocanonicalCurve,
    NonPercolatingError,
    convolve_binomial,
    ensemble_run,
    estimate_threshold,
    run_sweep,
)
from .physics import (
    PhysicalParams,
    bond_prob_from_time,
    threshold_time_lower_bound,
    time_to_threshold,
)

__all__ = [
    "BACKEND",
    "CanonicalCurve",
    "ContractedGraph",
    "Geometry",
    "Lattice",
    "MicrocanonicalCurve",
    "NonPercolatingError",
    "PhysicalParams",
    "bond_prob_from_time",
    "build_lattice",
    "contract_transparent",
    "convolve_binomial",
    "dilute_sites",
    "ensemble_run",
    "estimate_threshold",
    "run_sweep",
    "threshold_time_lower_bound",
    "time_to_threshold",
]
