"""Numerical tolerances shared by the library and its tests."""

NORM_TOL = 1e-12            # squared norm after normalize
HERMITIAN_TOL = 1e-12       # max |A - A^H|
UNITARY_TOL = 1e-10         # max |A^H A - I|
EIG_RESIDUAL_TOL = 1e-9     # |H v - lambda v|
EIG_ORTHO_TOL = 1e-10
EXPM_INVERSE_TOL = 1e-9
TENSOR_TOL = 1e-12
COMMUTATOR_TOL = 1e-10
CONJUGATION_TOL = 1e-14
PROPAGATOR_UNITARY_TOL = 1e-9
STATE_MATCH_TOL = 1e-9      # ensemble closure
OUTCOME_STATE_TOL = 1e-12

DENSITY_NORM_TOL = 1e-9
PROB_SUM_TOL = 1e-9
AMPLITUDE_NORM_TOL = 1e-12
ENERGY_DRIFT_TOL = 1e-6
SEPARATRIX_GUARD = 1e-9
ORDER_PARAM_TOL = 1e-9
FINE_GRAIN_TOL = 1e-12

GAUSS_TAIL_SIGMAS = 12.0
QUAD_TOL = 1e-13

MAX_DIM = 2 ** 12
UNRESOLVED_MARGIN = 0.1

# two-sided tail mass beyond 5 sigma
FIVE_SIGMA_ALPHA = 5.733031437583866e-07
