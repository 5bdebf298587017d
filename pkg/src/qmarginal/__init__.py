"""Desk-scale quantum marginal compatibility checks.

Decides (soundly, never overclaiming) whether a list of marginal density
operators can arise from one joint state, by comparing product marginals
against symmetric-subspace witness operators built combinatorially from
permutation diagrams.
"""

from ._backend import active_backend
from .scenario import (
    JointContext,
    MarginalScenario,
    ProductState,
    assemble_product,
    haar_compatible_state,
    haar_sample_pure,
    partial_trace,
    tau_map,
    validate_scenario,
)
from .diagrams import GuardExceeded, Perm, materialize, symmetrizer_contraction
from .witness import (
    WitnessReport,
    build_witness,
    check_order_n,
    check_ortho_count,
    definetti_validate,
    find_min_violating_order,
)

__all__ = [
    "JointContext",
    "MarginalScenario",
    "ProductState",
    "GuardExceeded",
    "Perm",
    "WitnessReport",
    "active_backend",
    "assemble_product",
    "build_witness",
    "check_order_n",
    "check_ortho_count",
    "definetti_validate",
    "find_min_violating_order",
    "haar_compatible_state",
    "haar_sample_pure",
    "materialize",
    "partial_trace",
    "symmetrizer_contraction",
    "tau_map",
    "validate_scenario",
]

__version__ = "0.1.0"
