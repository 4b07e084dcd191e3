"""Relativistic Toda lattice via direct and inverse spectral transforms.

The pencil (L, M) with diagonal a of L and subdiagonal b of M maps to its
generalized eigenvalues and Weyl-function weights and back. The lattice
flow is linear on the spectral side, which gives trajectories without time
stepping; an RK4 integrator of the lattice equations serves as a check.
"""

from .core import (
    BidiagonalPencil,
    FlowSpec,
    NewtonianState,
    SpectralData,
    Trajectory,
    WeylFunction,
    assemble_dense,
    validate_pencil,
)
from .direct import (
    direct_transform,
    generalized_eigenvalues,
    laurent_gram,
    weights_from_eigenvectors,
    weights_from_residues,
    weyl_eval,
)
from .flow import (
    RatePrediction,
    evolve_weights,
    newtonian_to_pencil,
    predict_a_limit,
    predict_b_rate,
    q_gap_slopes,
    solve_trajectory,
)
from .inverse import inverse_transform, inverse_transform_stieltjes, tfraction_peel_step
from .ode_oracle import integrate, integrate_at, rhs_general, rhs_identity, rhs_reciprocal

__version__ = "0.1.0"

__all__ = [
    "BidiagonalPencil",
    "FlowSpec",
    "NewtonianState",
    "RatePrediction",
    "SpectralData",
    "Trajectory",
    "WeylFunction",
    "assemble_dense",
    "direct_transform",
    "evolve_weights",
    "generalized_eigenvalues",
    "integrate",
    "integrate_at",
    "inverse_transform",
    "inverse_transform_stieltjes",
    "laurent_gram",
    "newtonian_to_pencil",
    "predict_a_limit",
    "predict_b_rate",
    "q_gap_slopes",
    "rhs_general",
    "rhs_identity",
    "rhs_reciprocal",
    "solve_trajectory",
    "tfraction_peel_step",
    "validate_pencil",
    "weights_from_eigenvectors",
    "weights_from_residues",
    "weyl_eval",
]
