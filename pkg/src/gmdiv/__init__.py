"""Divergences, comparison bounds, and entropy tools for Gaussian mixtures."""

from .bounds import (
    BoundId,
    InstanceFamily,
    SweepInstance,
    SweepReport,
    THM2_PROOF_CONSTANT,
    bound_rhs,
    bound_rhs_log,
    delta_star,
    dichotomy_bounds,
    ho_bound,
    lambda_star,
    lem_formula_gap,
    verify_sweep,
)
from .divergences import (
    DivergenceKind,
    IntegralEstimate,
    characteristic_function,
    default_tol,
    divergence,
    gaussian_radial_tail,
    plancherel_l2,
    renyi_integral,
    truncation_radius,
)
from .errors import CapabilityError, HypothesisError, QuadratureError
from .estimation import (
    ForecastResult,
    Net,
    RateFunctional,
    batch_net_mle,
    batch_risk_mc,
    greedy_cover,
    hellinger,
    hellinger_project,
    local_cover,
    local_covering_number,
    net_to_json,
    pairwise_hellinger,
    rate_functional,
    sequential_forecaster,
)
from .mixtures import (
    Compact,
    GaussianMixture,
    MixingDistribution,
    Subgaussian,
    Unconstrained,
    dichotomy_family,
    mixture_from_record,
    mixture_to_record,
    subgaussian_check,
)

__all__ = [
    "BoundId",
    "CapabilityError",
    "Compact",
    "DivergenceKind",
    "ForecastResult",
    "GaussianMixture",
    "HypothesisError",
    "InstanceFamily",
    "IntegralEstimate",
    "MixingDistribution",
    "Net",
    "QuadratureError",
    "RateFunctional",
    "Subgaussian",
    "SweepInstance",
    "SweepReport",
    "THM2_PROOF_CONSTANT",
    "Unconstrained",
    "batch_net_mle",
    "batch_risk_mc",
    "bound_rhs",
    "bound_rhs_log",
    "characteristic_function",
    "default_tol",
    "delta_star",
    "dichotomy_bounds",
    "dichotomy_family",
    "divergence",
    "gaussian_radial_tail",
    "greedy_cover",
    "hellinger",
    "hellinger_project",
    "ho_bound",
    "lambda_star",
    "lem_formula_gap",
    "local_cover",
    "local_covering_number",
    "mixture_from_record",
    "mixture_to_record",
    "net_to_json",
    "pairwise_hellinger",
    "plancherel_l2",
    "rate_functional",
    "renyi_integral",
    "sequential_forecaster",
    "subgaussian_check",
    "truncation_radius",
    "verify_sweep",
]

__version__ = "0.1.0"
