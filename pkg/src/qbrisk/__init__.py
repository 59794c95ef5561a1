"""Bayesian lower bounds for the quantum estimation Bayes risk.

Numerical toolkit for the hierarchy of Bayes-risk lower bounds on finite
dimensional quantum models: the direct classical-style bound, the closed-form
lambda-LD family, the constant-weight Holevo-type SDP family, the per-node
varying-weight Holevo-type SDP, and the block-operator (Nagaoka-Hayashi-type)
SDP, together with classical and explicit-measurement oracles that validate
them.
"""

__version__ = "0.1.0"

from .bounds_sdp import (bh_lambda_bound, bh_thetadep_bound, bnh_bound,
                         lambda_maximality_check, z_lambda)
from .closed_form import (BoundValue, LambdaLDSolution, bld_bound, bld_max_over_lambda,
                          direct_bound, personick_matrix_bound, solve_lambda_ld)
from .errors import (DegeneratePrior, DegenerateWeight, IllConditionedLDEquation,
                     InternalInconsistency, InvalidInput, NotClassical, NotPSD,
                     ProblemTooLarge, SingularAveragedState, SolverError, ToolkitError,
                     UnsupportedWeight)
from .lambda_maps import is_symmetric_hermitian, map_lambda, map_minus, map_plus
from .linalg import (BlockOperator, eig_hermitian, outer_xxT1, partial_transpose_T1,
                     real_embedding, sqrt_psd, trace_norm)
from .measurement import (ClassicalModelView, Povm, classical_optimal_risk,
                          classical_view_of_commuting_model, measured_risk, mse_matrix,
                          pairwise_commuting, personick_achieving_measurement,
                          random_estimates, random_povm, risk_two_forms)
from .models import (AveragedQuantities, ConstantWeight, ModelSpec, PriorNodeSet,
                     Scenario, VaryingWeight, catalog, compute_averages, get_scenario,
                     quadrature_discretize)
from .sdp import (CvxpyBackend, SdpProblem, SdpSolution, SolverBackend,
                  available_backends, dump_problem, get_backend)

__all__ = [name for name in dir() if not name.startswith("_")]
