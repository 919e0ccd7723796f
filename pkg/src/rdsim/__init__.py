"""Randomizing-device simulations: separatrix pendulum, Heisenberg chain, symmetry counting."""
from .born import (Ensemble, MeasurementModel, OutcomeSymmetry, SymmetryViolation, born_probability,
                   check_P1, check_P2, demo_model, equal_amplitude_theorem, fine_grain,
                   outcome_counts, verify_symmetry_rule)
from .harness import NoiseDistribution, OutcomeCounts, RngStream, chi_square_gof, wilson_interval
from .linalg import (DimensionError, NotHermitianError, OperatorMatrix, StateVector,
                     hermitian_eigensystem, matrix_exponential, tensor_product)
from .pendulum import (Outcome, PendulumExperiment, UnresolvedOutcome, classify_dynamics,
                       classify_energy, critical_velocity, integrate, outcome_probabilities,
                       run_pendulum_trials)
from .spinchain import ChainSpec, build_heisenberg, ground_space, sensitivity_scan

__version__ = "0.1.0"

__all__ = [
    "ChainSpec", "DimensionError", "Ensemble", "MeasurementModel", "NoiseDistribution",
    "NotHermitianError", "OperatorMatrix", "Outcome", "OutcomeCounts", "OutcomeSymmetry",
    "PendulumExperiment", "RngStream", "StateVector", "SymmetryViolation", "UnresolvedOutcome",
    "born_probability", "build_heisenberg", "check_P1", "check_P2", "chi_square_gof",
    "classify_dynamics", "classify_energy", "critical_velocity", "demo_model",
    "equal_amplitude_theorem", "fine_grain", "ground_space", "hermitian_eigensystem",
    "integrate", "matrix_exponential", "outcome_counts", "outcome_probabilities",
    "run_pendulum_trials", "sensitivity_scan", "tensor_product", "verify_symmetry_rule",
    "wilson_interval",
]
