"""Numerical kinetics of yard-sale wealth exchange.

Three descriptions of the same stochastic dynamics: agent-based Monte
Carlo, a Boltzmann collision equation, and its nonlocal Fokker-Planck
limit, plus the inequality metrics (Lorenz curve, Gini coefficient) that
act as a monotone functional of all three.
"""
from .agents import (
    AgentEnsemble,
    InitialCondition,
    SimConfig,
    SimResult,
    run,
    run_replica,
    step,
    transact,
)
from .analysis import (
    CrossCompareReport,
    HTheoremReport,
    ParetoFit,
    TolPolicy,
    compare_traces,
    cross_compare,
    pareto_fit,
    verify_h_theorem,
)
from .beta_dist import BetaDistribution
from .boltzmann import (
    BoltzmannConfig,
    BoltzmannResult,
    CollisionTerms,
    collision_linear,
    collision_quadratic,
    collision_terms,
    gini_rate_split,
    gini_rate_split_by_sign,
    solve_boltzmann,
    split_rate_tolerance,
    step_boltzmann,
)
from .distribution import (
    WealthDistribution,
    cumulative_agents,
    cumulative_wealth,
    exponential_density,
    moments,
    pareto_density,
    pareto_tail_fraction,
    point_mass,
    survival,
)
from .errors import ConfigError, InsufficientDataError, StabilityError
from .fokker_planck import (
    FpConfig,
    FpResult,
    boundary_flux_potential,
    fp_gini_rate,
    fp_rhs,
    nonlocal_coefficient,
    solve_fp,
    step_fp,
    transfer_variance,
)
from .grid import WealthGrid
from .inequality import (
    LorenzCurve,
    frechet_derivative,
    gini,
    gini_rate,
    gini_via_lorenz,
    gini_via_survival,
    lorenz_curve,
    sample_gini,
)
from .traces import GiniTrace

__version__ = "0.1.0"

__all__ = [
    "AgentEnsemble",
    "BetaDistribution",
    "BoltzmannConfig",
    "BoltzmannResult",
    "CollisionTerms",
    "ConfigError",
    "CrossCompareReport",
    "HTheoremReport",
    "InsufficientDataError",
    "ParetoFit",
    "TolPolicy",
    "FpConfig",
    "FpResult",
    "GiniTrace",
    "InitialCondition",
    "LorenzCurve",
    "SimConfig",
    "SimResult",
    "StabilityError",
    "WealthDistribution",
    "WealthGrid",
    "boundary_flux_potential",
    "collision_linear",
    "collision_quadratic",
    "collision_terms",
    "compare_traces",
    "cross_compare",
    "cumulative_agents",
    "cumulative_wealth",
    "exponential_density",
    "fp_gini_rate",
    "fp_rhs",
    "frechet_derivative",
    "gini",
    "gini_rate",
    "gini_rate_split",
    "gini_rate_split_by_sign",
    "gini_via_lorenz",
    "gini_via_survival",
    "lorenz_curve",
    "moments",
    "nonlocal_coefficient",
    "pareto_density",
    "pareto_fit",
    "pareto_tail_fraction",
    "point_mass",
    "run",
    "run_replica",
    "sample_gini",
    "solve_boltzmann",
    "solve_fp",
    "split_rate_tolerance",
    "step",
    "step_boltzmann",
    "step_fp",
    "survival",
    "transact",
    "transfer_variance",
    "verify_h_theorem",
    "__version__",
]
