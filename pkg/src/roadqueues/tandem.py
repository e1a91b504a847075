"""Two road sections in tandem, coupled through demand and supply.

Cars arrive at the upstream section as a Poisson stream of rate lambda,
move to the downstream section at the rate

    min(demand_1(n1), supply_2(n2)),

and leave the downstream section at its own flow rate q_2(n2).  The exact
joint occupancy process is not reversible, so instead of solving it
directly the model decomposes the tandem:

* the downstream section is treated as a single flow-form queue fed at
  the average transfer rate (written ``transfer_rate`` here);
* the upstream section, conditioned on a downstream count n2, is a
  birth-death chain whose death rates are capped by supply_2(n2);
* the upstream marginal mixes those conditional distributions with the
  downstream weights.

The average transfer rate must equal the upstream throughput, which gives
a scalar fixed-point equation

    rate = lambda * (1 - upstream blocking at that rate).

The residual of this equation is continuous and strictly decreasing, is
positive at rate 0 and negative at rate lambda, so a root always exists,
is unique, and bisection on [0, lambda] always finds it.  Direct
self-substitution may instead settle into a two-value cycle: the map's
slope at the root is -(lambda / rate) * S, where the stability statistic
S is the covariance-like coupling between downstream congestion and
upstream blocking.  S >= 0 always; the iteration is guaranteed to
converge when S < rate / lambda at the root.  When a cycle is detected
the solver reports the midpoint convention
(lambda + map(lambda)) / 2 together with the raw cycle pair, and derives
distributions from the bisection root, which exists regardless of
iteration stability.

Units: rates veh/h, counts cars, times hours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .diagram import (
    FundamentalDiagram,
    LinearQuadratic,
    demand_profile,
    supply_profile,
)
from .errors import DomainError, NonConvergenceError
from .section import PerformanceReport, StationaryDistribution, performance_measures
from . import section as _section

__all__ = [
    "TandemConfig",
    "SolutionMode",
    "ConvergenceCheck",
    "TandemSolution",
    "downstream_distribution",
    "coupled_service_rate",
    "upstream_conditional",
    "conditional_matrix",
    "upstream_marginal",
    "throughput_map",
    "fixed_point_residual",
    "joint_distribution",
    "exit_throughput",
    "stability_statistic",
    "iteration_convergence_check",
    "solve_bisection",
    "solve_iteration",
    "DEFAULT_MAX_ITER",
]

DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class TandemConfig:
    """Two quadratic-flow sections and the upstream arrival rate (veh/h)."""

    section1: FundamentalDiagram
    section2: FundamentalDiagram
    arrival_rate: float

    def __post_init__(self) -> None:
        for name, diagram in (("section1", self.section1), ("section2", self.section2)):
            if not isinstance(diagram.model, LinearQuadratic):
                raise DomainError(f"{name}: the tandem requires the quadratic flow model")
        if self.arrival_rate < 0:
            raise DomainError(
                f"arrival rate must be nonnegative, got {self.arrival_rate}"
            )

    def default_tol(self) -> float:
        """Solver tolerance: 1e-6 of the upstream peak flow."""
        return 1e-6 * self.section1.q_max


class SolutionMode(Enum):
    """How a tandem solution was obtained."""

    BISECTION_ROOT = "bisection_root"
    CONVERGED_ITERATION = "converged_iteration"
    OSCILLATORY_AVERAGED = "oscillatory_averaged"


@dataclass(frozen=True)
class ConvergenceCheck:
    """Sufficient condition for self-substitution to converge.

    ``satisfied`` is True when statistic < bound, with bound = rate / lambda.
    The condition is sufficient, not necessary.
    """

    satisfied: bool
    statistic: float
    bound: float


@dataclass(frozen=True, eq=False)
class TandemSolution:
    """A solved tandem: rates, distributions and per-section performance.

    ``transfer_rate`` is the average flow from the upstream into the
    downstream section; ``exit_rate`` the average flow leaving the system.
    ``conditional[:, n2]`` is the upstream distribution given a downstream
    count n2, and ``joint`` is the decomposition's joint matrix, whose
    row sums reproduce ``p1`` and column sums ``p2``.  For oscillatory
    solutions ``transfer_rate`` is the cycle-midpoint convention while the
    distributions and rates derive from the bisection root; ``adherence``
    then carries the detected cycle pair (high, low).
    """

    config: TandemConfig
    mode: SolutionMode
    transfer_rate: float
    exit_rate: float
    residual: float
    trace: np.ndarray
    p1: StationaryDistribution
    p2: StationaryDistribution
    conditional: np.ndarray
    joint: np.ndarray
    report1: PerformanceReport
    report2: PerformanceReport
    adherence: tuple[float, float] | None = None

    def to_json_dict(self) -> dict:
        return {
            "lambda": self.config.arrival_rate,
            "mode": self.mode.value,
            "theta": self.transfer_rate,
            "delta": self.exit_rate,
            "residual": self.residual,
            "trace": [float(t) for t in self.trace],
            "adherence": None if self.adherence is None else list(self.adherence),
            "p1": self.p1.to_json_dict(),
            "p2": self.p2.to_json_dict(),
            "conditional": [[float(x) for x in row] for row in self.conditional],
            "joint": [[float(x) for x in row] for row in self.joint],
            "performance": {
                "section1": self.report1.to_json_dict(),
                "section2": self.report2.to_json_dict(),
            },
        }


def downstream_distribution(rate: float, cfg: TandemConfig) -> StationaryDistribution:
    """Downstream occupancy distribution when fed at the given rate."""
    dist = _section.stationary_flow_form(rate, cfg.section2)
    return StationaryDistribution(dist.probs, dist.capacity, "tandem_marginal", rate)


def coupled_service_rate(i1: int, i2: int, cfg: TandemConfig) -> float:
    """Normalized upstream service factor under a downstream count i2.

    Equals min(demand_1(i1), supply_2(i2)) / q_max_1 / i1.
    """
    c1 = cfg.section1.capacity
    c2 = cfg.section2.capacity
    if not 1 <= i1 <= c1:
        raise DomainError(f"upstream count must lie in [1, {c1}], got {i1}")
    if not 0 <= i2 <= c2:
        raise DomainError(f"downstream count must lie in [0, {c2}], got {i2}")
    from .diagram import demand as _demand, supply as _supply

    rate = min(_demand(i1, cfg.section1), _supply(i2, cfg.section2))
    return rate / cfg.section1.q_max / i1


@lru_cache(maxsize=128)
def _conditional_matrix_cached(cfg: TandemConfig) -> np.ndarray:
    lam = cfg.arrival_rate
    c1 = cfg.section1.capacity
    c2 = cfg.section2.capacity
    cols = np.empty((c1 + 1, c2 + 1))
    if lam == 0.0:
        cols[:] = 0.0
        cols[0, :] = 1.0
    else:
        dem = demand_profile(cfg.section1)[1:]          # demand at counts 1..c1
        sup = supply_profile(cfg.section2)              # supply at counts 0..c2
        caps = np.minimum(dem[:, None], sup[None, :])   # (c1, c2+1)
        log_w = np.vstack(
            (np.zeros(c2 + 1), np.cumsum(math.log(lam) - np.log(caps), axis=0))
        )
        shifted = np.exp(log_w - log_w.max(axis=0, keepdims=True))
        cols = shifted / shifted.sum(axis=0, keepdims=True)
    cols.setflags(write=False)
    return cols


def conditional_matrix(cfg: TandemConfig) -> np.ndarray:
    """Upstream conditional distributions, one column per downstream count."""
    return _conditional_matrix_cached(cfg)


def upstream_conditional(n2: int, cfg: TandemConfig) -> StationaryDistribution:
    """Upstream occupancy distribution given a fixed downstream count."""
    c2 = cfg.section2.capacity
    if not 0 <= n2 <= c2:
        raise DomainError(f"downstream count must lie in [0, {c2}], got {n2}")
    column = conditional_matrix(cfg)[:, n2]
    return StationaryDistribution(
        column, cfg.section1.capacity, f"tandem_conditional(n2={n2})", cfg.arrival_rate
    )


def upstream_marginal(rate: float, cfg: TandemConfig) -> StationaryDistribution:
    """Upstream occupancy distribution at a given transfer rate.

    Mixes the conditional distributions over the downstream weights
    (downstream counts 0..c2 inclusive, so the mixture stays normalized).
    """
    _check_rate(rate, cfg)
    weights = downstream_distribution(rate, cfg).probs
    probs = conditional_matrix(cfg) @ weights
    probs = probs / probs.sum()
    return StationaryDistribution(
        probs, cfg.section1.capacity, "tandem_marginal", cfg.arrival_rate
    )


def _check_rate(rate: float, cfg: TandemConfig) -> None:
    if not 0.0 <= rate <= cfg.arrival_rate:
        raise DomainError(
            f"transfer rate must lie in [0, {cfg.arrival_rate}], got {rate}"
        )


def _blocking_row(cfg: TandemConfig) -> np.ndarray:
    # upstream blocking probability conditioned on each downstream count
    return conditional_matrix(cfg)[-1, :]


def throughput_map(rate: float, cfg: TandemConfig) -> float:
    """Upstream throughput when the downstream is fed at the given rate.

    The fixed point of this map is the self-consistent transfer rate.
    """
    _check_rate(rate, cfg)
    lam = cfg.arrival_rate
    if lam == 0.0:
        return 0.0
    weights = downstream_distribution(rate, cfg).probs
    blocking = float(_blocking_row(cfg) @ weights)
    return lam * (1.0 - blocking)


def fixed_point_residual(rate: float, cfg: TandemConfig) -> float:
    """throughput_map(rate) - rate; positive at 0, negative at lambda."""
    return throughput_map(rate, cfg) - rate


def joint_distribution(conditional: np.ndarray, p2: StationaryDistribution) -> np.ndarray:
    """Joint occupancy matrix: conditional columns scaled by downstream weights."""
    if conditional.ndim != 2 or conditional.shape[1] != p2.capacity + 1:
        raise DomainError(
            f"conditional matrix shape {conditional.shape} does not match "
            f"downstream capacity {p2.capacity}"
        )
    return conditional * p2.probs[None, :]


def exit_throughput(rate: float, cfg: TandemConfig) -> float:
    """Average flow leaving the downstream section when fed at the rate."""
    if rate < 0:
        raise DomainError(f"transfer rate must be nonnegative, got {rate}")
    p2 = downstream_distribution(rate, cfg)
    return rate * (1.0 - p2.blocking)


def stability_statistic(rate: float, cfg: TandemConfig) -> float:
    """Coupling between downstream congestion and upstream blocking.

    S = sum_n2 b(n2) * p2(n2) * (n2 - mean), where b(n2) is the upstream
    blocking probability given n2; the slope of the throughput map is
    -(lambda / rate) * S, so S controls iteration stability.  Computed in
    the equivalent pairwise form

        S = (1/2) * sum_{j,k} p2(j) p2(k) (b(k) - b(j)) (k - j)

    whose terms are all nonnegative (b is non-decreasing in n2 because
    supply shrinks as the downstream fills), so the result cannot go
    negative through rounding either.
    """
    if rate <= 0:
        raise DomainError(f"the stability statistic needs a positive rate, got {rate}")
    _check_rate(rate, cfg)
    p2 = downstream_distribution(rate, cfg).probs
    blocking = _blocking_row(cfg)
    counts = np.arange(cfg.section2.capacity + 1, dtype=float)
    weighted = (p2[:, None] * p2[None, :]) * (
        (blocking[None, :] - blocking[:, None]) * (counts[None, :] - counts[:, None])
    )
    return 0.5 * float(weighted.sum())


def iteration_convergence_check(rate: float, cfg: TandemConfig) -> ConvergenceCheck:
    """Check the sufficient condition S < rate / lambda at a given rate."""
    if cfg.arrival_rate <= 0:
        raise DomainError("the convergence check needs a positive arrival rate")
    statistic = stability_statistic(rate, cfg)
    bound = rate / cfg.arrival_rate
    return ConvergenceCheck(statistic < bound, statistic, bound)


def _trivial_solution(cfg: TandemConfig, mode: SolutionMode) -> TandemSolution:
    c1 = cfg.section1.capacity
    p2 = downstream_distribution(0.0, cfg)
    conditional = conditional_matrix(cfg)
    p1 = StationaryDistribution(
        conditional @ p2.probs, c1, "tandem_marginal", 0.0
    )
    joint = joint_distribution(conditional, p2)
    return TandemSolution(
        config=cfg,
        mode=mode,
        transfer_rate=0.0,
        exit_rate=0.0,
        residual=0.0,
        trace=np.array([0.0]),
        p1=p1,
        p2=p2,
        conditional=conditional,
        joint=joint,
        report1=performance_measures(0.0, p1),
        report2=performance_measures(0.0, p2),
    )


def _assemble(
    cfg: TandemConfig,
    mode: SolutionMode,
    fixed_rate: float,
    reported_rate: float,
    residual: float,
    trace: list[float],
    adherence: tuple[float, float] | None,
) -> TandemSolution:
    p2 = downstream_distribution(fixed_rate, cfg)
    conditional = conditional_matrix(cfg)
    p1 = upstream_marginal(fixed_rate, cfg)
    joint = joint_distribution(conditional, p2)
    return TandemSolution(
        config=cfg,
        mode=mode,
        transfer_rate=reported_rate,
        exit_rate=exit_throughput(fixed_rate, cfg),
        residual=residual,
        trace=np.asarray(trace),
        p1=p1,
        p2=p2,
        conditional=conditional,
        joint=joint,
        report1=performance_measures(cfg.arrival_rate, p1),
        report2=performance_measures(fixed_rate, p2),
        adherence=adherence,
    )


def _bisect_rate(cfg: TandemConfig, tol: float) -> tuple[float, float, list[float]]:
    lam = cfg.arrival_rate
    lo, hi = 0.0, lam
    trace: list[float] = []
    mid = 0.5 * lam
    for _ in range(DEFAULT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        trace.append(mid)
        residual = fixed_point_residual(mid, cfg)
        if abs(residual) <= tol:
            return mid, residual, trace
        if residual > 0.0:
            lo = mid
        else:
            hi = mid
    raise NonConvergenceError(
        f"bisection failed to reach tolerance {tol} within {DEFAULT_MAX_ITER} steps",
        trace,
    )


def solve_bisection(cfg: TandemConfig, tol: float | None = None) -> TandemSolution:
    """Solve the transfer-rate fixed point by bisection on [0, lambda].

    The residual is positive at 0 and negative at lambda and strictly
    decreasing in between, so this always converges.  Stops as soon as
    |map(rate) - rate| <= tol (default 1e-6 * upstream q_max).
    """
    tol = cfg.default_tol() if tol is None else float(tol)
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if cfg.arrival_rate == 0.0:
        return _trivial_solution(cfg, SolutionMode.BISECTION_ROOT)
    rate, residual, trace = _bisect_rate(cfg, tol)
    return _assemble(
        cfg, SolutionMode.BISECTION_ROOT, rate, rate, abs(residual), trace, None
    )


def solve_iteration(
    cfg: TandemConfig,
    theta0: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float | None = None,
) -> TandemSolution:
    """Solve the fixed point by direct self-substitution.

    Starting from ``theta0`` (default lambda), repeatedly applies the
    throughput map.  Stops as converged when successive iterates agree
    within tol.  A two-value cycle is declared when the iterate returns to
    the value two steps back (within tol) while successive iterates still
    differ, three times in a row; the solution then reports the midpoint
    convention (lambda + map(lambda)) / 2 as its transfer rate, carries
    the raw cycle pair in ``adherence``, and evaluates distributions at
    the bisection root.  Exhausting ``max_iter`` raises
    NonConvergenceError with the trace attached.
    """
    tol = cfg.default_tol() if tol is None else float(tol)
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter}")
    lam = cfg.arrival_rate
    if lam == 0.0:
        return _trivial_solution(cfg, SolutionMode.CONVERGED_ITERATION)
    theta = lam if theta0 is None else float(theta0)
    _check_rate(theta, cfg)
    trace = [theta]
    cycle_hits = 0
    for _ in range(max_iter):
        theta_next = throughput_map(theta, cfg)
        trace.append(theta_next)
        step = abs(theta_next - theta)
        if step <= tol:
            return _assemble(
                cfg,
                SolutionMode.CONVERGED_ITERATION,
                theta_next,
                theta_next,
                step,
                trace,
                None,
            )
        if len(trace) >= 3 and abs(theta_next - trace[-3]) <= tol:
            cycle_hits += 1
            if cycle_hits >= 3:
                pair = (max(trace[-2], theta_next), min(trace[-2], theta_next))
                map_at_lam = throughput_map(lam, cfg)
                averaged = 0.5 * (lam + map_at_lam)
                fixed_rate, residual, _ = _bisect_rate(cfg, tol)
                return _assemble(
                    cfg,
                    SolutionMode.OSCILLATORY_AVERAGED,
                    fixed_rate,
                    averaged,
                    abs(residual),
                    trace,
                    pair,
                )
        else:
            cycle_hits = 0
        theta = theta_next
    raise NonConvergenceError(
        f"self-substitution did not converge within {max_iter} iterations", trace
    )
