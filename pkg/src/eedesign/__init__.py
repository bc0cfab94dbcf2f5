"""Energy-efficient design of cellular networks with multi-antenna APs
placed as a Poisson point process."""

__version__ = "0.1.0"

from .analytic import (
    area_energy_consumption,
    area_spectral_efficiency,
    conditional_interference_mean,
    ee_density_limit,
    energy_efficiency,
    evaluate,
    feasibility_gamma_bound,
    mean_distance_moment,
    se_lower_bound,
)
from .errors import ConfigError, EmptyFeasibleSetError, InfeasibleError, InvalidParameterError
from .optimizer import (
    alternating_optimize,
    grid_search,
    k_star,
    m_star,
    optimize_with_ue_density,
    profile_optimize,
    relaxed_convexity_check,
    rho_star,
)
from .params import (
    TABLE1_HARDWARE,
    TABLE1_PROPAGATION,
    Constraint,
    DesignPoint,
    EvaluationResult,
    HardwareProfile,
    PropagationParams,
)

__all__ = [
    "area_energy_consumption",
    "area_spectral_efficiency",
    "conditional_interference_mean",
    "ee_density_limit",
    "energy_efficiency",
    "evaluate",
    "feasibility_gamma_bound",
    "mean_distance_moment",
    "se_lower_bound",
    "ConfigError",
    "EmptyFeasibleSetError",
    "InfeasibleError",
    "InvalidParameterError",
    "alternating_optimize",
    "grid_search",
    "k_star",
    "m_star",
    "optimize_with_ue_density",
    "profile_optimize",
    "relaxed_convexity_check",
    "rho_star",
    "TABLE1_HARDWARE",
    "TABLE1_PROPAGATION",
    "Constraint",
    "DesignPoint",
    "EvaluationResult",
    "HardwareProfile",
    "PropagationParams",
]
