"""Distributional dynamic programming for policy evaluation.

Approximates per-state return distributions of a finite MDP under a fixed
policy by iterating the distributional Bellman operator composed with a
finitely supported projection whose grid is chosen anew each iteration.
"""

from .analysis import AnalysisConfig, MomentInfo, SizeFunction, circular_reference
from .bellman import ReturnApprox, bellman_cdf, materialize_bellman_finite, project_bellman
from .distributions import (
    Cauchy,
    Dirac,
    Distribution,
    Exponential,
    FiniteDist,
    Normal,
    Uniform,
    density_estimate,
    finite_from_particles,
    from_config,
    moment_order,
)
from .engine import RunConfig, RunReport, compare, run_ddp, run_mc
from .mdp import MdpSpec, sample_truncated_return, validate
from .metrics import (
    HolderParams,
    density_sup_bound,
    ks,
    ks_from_wasserstein_bound,
    lp_cdf_distance,
    max_over_states,
    wasserstein,
)
from .projection import ProjectionParam, project, xi_lin, xi_stats
from .schedules import (
    ScheduleConfig,
    adp_params,
    ppa_params,
    qdp_update,
    qsp_params,
    quantile_box,
    size_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "MomentInfo",
    "SizeFunction",
    "circular_reference",
    "ReturnApprox",
    "bellman_cdf",
    "materialize_bellman_finite",
    "project_bellman",
    "Cauchy",
    "Dirac",
    "Distribution",
    "Exponential",
    "FiniteDist",
    "Normal",
    "Uniform",
    "density_estimate",
    "finite_from_particles",
    "from_config",
    "moment_order",
    "RunConfig",
    "RunReport",
    "compare",
    "run_ddp",
    "run_mc",
    "MdpSpec",
    "sample_truncated_return",
    "validate",
    "HolderParams",
    "density_sup_bound",
    "ks",
    "ks_from_wasserstein_bound",
    "lp_cdf_distance",
    "max_over_states",
    "wasserstein",
    "ProjectionParam",
    "project",
    "xi_lin",
    "xi_stats",
    "ScheduleConfig",
    "adp_params",
    "ppa_params",
    "qdp_update",
    "qsp_params",
    "quantile_box",
    "size_schedule",
]
