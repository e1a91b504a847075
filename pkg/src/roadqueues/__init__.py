"""Stationary analysis of finite-capacity road traffic queues.

Sections of road are modelled as state-dependent queues whose service
rate follows a traffic fundamental diagram.  The package covers single
sections (speed-law and flow-law forms of the stationary occupancy
distribution), two sections in tandem coupled through demand and supply
(solved through a scalar fixed point), and exact Markov-chain references
for validating both.
"""

from .diagram import (
    Exponential,
    FundamentalDiagram,
    LinearQuadratic,
    SectionParams,
    demand,
    demand_profile,
    exponential_speed,
    fit_beta_gamma,
    flow_profile,
    linear_speed,
    normalized_service_rate,
    quadratic_flow,
    section_from_json,
    speed_profile,
    supply,
    supply_profile,
)
from .errors import ConfigError, DomainError, NonConvergenceError
from .oracle import (
    CtmcSpec,
    birth_death_stationary,
    comparison_report,
    joint_spec,
    joint_tandem_stationary,
    total_variation,
)
from .section import (
    PerformanceReport,
    SectionKind,
    StationaryDistribution,
    outflow,
    performance_measures,
    stationary_flow_form,
    stationary_speed_form,
)
from .tandem import (
    ConvergenceCheck,
    SolutionMode,
    TandemConfig,
    TandemSolution,
    conditional_matrix,
    coupled_service_rate,
    downstream_distribution,
    exit_throughput,
    fixed_point_residual,
    iteration_convergence_check,
    joint_distribution,
    solve_bisection,
    solve_iteration,
    stability_statistic,
    throughput_map,
    upstream_conditional,
    upstream_marginal,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceCheck",
    "CtmcSpec",
    "DomainError",
    "Exponential",
    "FundamentalDiagram",
    "LinearQuadratic",
    "NonConvergenceError",
    "PerformanceReport",
    "SectionKind",
    "SectionParams",
    "SolutionMode",
    "StationaryDistribution",
    "TandemConfig",
    "TandemSolution",
    "birth_death_stationary",
    "comparison_report",
    "conditional_matrix",
    "coupled_service_rate",
    "demand",
    "demand_profile",
    "downstream_distribution",
    "exit_throughput",
    "exponential_speed",
    "fit_beta_gamma",
    "fixed_point_residual",
    "flow_profile",
    "iteration_convergence_check",
    "joint_distribution",
    "joint_spec",
    "joint_tandem_stationary",
    "linear_speed",
    "normalized_service_rate",
    "outflow",
    "performance_measures",
    "quadratic_flow",
    "section_from_json",
    "solve_bisection",
    "solve_iteration",
    "speed_profile",
    "stability_statistic",
    "stationary_flow_form",
    "stationary_speed_form",
    "supply",
    "supply_profile",
    "throughput_map",
    "total_variation",
    "upstream_conditional",
    "upstream_marginal",
]
