"""Numerical toolkit for sums of sectorial operators on finite-dimensional
model spaces: contour functional calculus, square-function and randomized
norms, boundedness estimators with replayable witnesses, Mellin/Gamma
closed forms, and discrete-parabolic maximal regularity."""

from .bounds import (BoundEstimate, OperatorFamily, Witness,
                     gamma_bound_estimate, lq_bound_estimate,
                     r_bound_estimate, replay_witness, resolvent_ray_family,
                     rq_sectoriality_profile)
from .contour import (ContourQuadrature, HolomorphicSymbol, bip_profile,
                      fractional_power, functional_calculus,
                      halfline_quadrature, imaginary_power, phi_symbol,
                      power_shift, psi_symbol, sector_quadrature,
                      symbol_by_label, z2_over_1pz_4, z_over_1pz_cubed,
                      z_over_1pz_sq)
from .core import (LinearOperator, MixedNormSpec, as_operator,
                   dirichlet_laplacian_1d, estimate_sector_profile,
                   make_kronecker_pair, mixed_norm, resolvent_matrix,
                   time_derivative_operator)
from .errors import (AngleViolation, ConfigError, ContourTooTight,
                     IncompatibleSpec, NotConverged, NumericalFailure,
                     PoleAt, SectorsumError, SingularBase,
                     SingularResolvent, SingularSum, StripViolation,
                     WeightOutOfRange)
from .lpnorms import (SquareFunctionSpec, dual_tl_norm, gamma_norm, lp_norm,
                      square_function_gram, tl_norm)
from .maxreg import (ParabolicProblem, maxreg_constant, solve_mild,
                     solve_opsum, y_theta_norm)
from .mellin import (DoreVenniKernel, bip_equivalence_constant,
                     dore_venni_convolution, gamma, mellin_closed_form,
                     mellin_numeric, mellin_operator_identity,
                     mellin_product_convolution, nielsen_bounds_check,
                     oscillatory_quadrature, plancherel_pairing)
from .opsum import (OperatorSumProblem, apply_AS, build_sum_inverse,
                    closedness_constant, dense_sum_inverse,
                    pairing_chain_bound, ray_pairing,
                    reconstruct_AS_pairing)
from .problems import heat_problem, problem_from_config, standard_battery

__version__ = "0.1.0"

__all__ = [
    "AngleViolation", "BoundEstimate", "ConfigError", "ContourQuadrature",
    "ContourTooTight", "DoreVenniKernel", "HolomorphicSymbol",
    "IncompatibleSpec", "LinearOperator", "MixedNormSpec",
    "NotConverged", "NumericalFailure", "OperatorFamily",
    "OperatorSumProblem", "ParabolicProblem", "PoleAt", "SectorsumError",
    "SingularBase", "SingularResolvent", "SingularSum",
    "SquareFunctionSpec", "StripViolation", "WeightOutOfRange", "Witness",
    "apply_AS", "as_operator", "bip_equivalence_constant", "bip_profile",
    "build_sum_inverse", "closedness_constant", "dense_sum_inverse",
    "dirichlet_laplacian_1d", "dore_venni_convolution", "dual_tl_norm",
    "estimate_sector_profile", "fractional_power", "functional_calculus",
    "gamma", "gamma_bound_estimate", "gamma_norm", "halfline_quadrature",
    "heat_problem", "imaginary_power", "lp_norm", "lq_bound_estimate",
    "make_kronecker_pair", "maxreg_constant", "mellin_closed_form",
    "mellin_numeric", "mellin_operator_identity",
    "mellin_product_convolution", "mixed_norm", "nielsen_bounds_check",
    "oscillatory_quadrature", "pairing_chain_bound", "phi_symbol",
    "plancherel_pairing", "power_shift", "problem_from_config",
    "psi_symbol", "r_bound_estimate", "ray_pairing",
    "reconstruct_AS_pairing", "replay_witness", "resolvent_matrix",
    "resolvent_ray_family", "rq_sectoriality_profile", "sector_quadrature",
    "solve_mild", "solve_opsum", "square_function_gram",
    "standard_battery", "symbol_by_label", "time_derivative_operator",
    "tl_norm", "y_theta_norm", "z2_over_1pz_4", "z_over_1pz_cubed",
    "z_over_1pz_sq",
]
