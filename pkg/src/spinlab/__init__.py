"""Nonlinear Dirac equations on flat tori: models, continuation and identity checks."""
from .clifford import CliffordRep, build_clifford_rep, clifford_mul, clifford_residuals
from .models import ModelKind, ModelParams, el_residual, model_energy
from .solver import ContinuationError, ContinuationState, solve_branch
from .torus import (
    ANTIPERIODIC,
    PERIODIC,
    DiracOperator,
    SpinorField,
    TorusLattice,
    build_dirac,
    dirac_spectrum,
)

__all__ = [
    "ANTIPERIODIC", "PERIODIC", "CliffordRep", "ContinuationError", "ContinuationState",
    "DiracOperator", "ModelKind", "ModelParams", "SpinorField", "TorusLattice",
    "build_clifford_rep", "build_dirac", "clifford_mul", "clifford_residuals",
    "dirac_spectrum", "el_residual", "model_energy", "solve_branch",
]

__version__ = "0.1.0"
