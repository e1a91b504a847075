"""Stationary analysis of one road section as a finite queue.

A section with capacity c is a state-dependent queue with c parallel
servers and no waiting room: cars arrive as a Poisson stream of rate
lambda (veh/h), every car present is "in service" at the current
occupancy-dependent speed, and arrivals that find the section full are
lost.  The stationary occupancy distribution depends on the service law
only through its per-state rates, so it can be written in two equivalent
ways:

* speed form, driven by the normalized speed profile f(i) = v_i / v1,
  with weights (lambda * L / v1)^n / prod_{i<=n} (i * f(i));
* flow form, driven by the flow law, with weights prod_{i<=n} lambda / q_i.

Under the linear speed law both forms coincide exactly, because
q_i = i * v_i / L.  Weights are accumulated in the log domain, so
capacities up to about 1e4 cars are handled without overflow; stationary
probabilities smaller than roughly 1e-300 flush to zero.

Units: flows veh/h, times hours (expected time on the section is
expected count divided by throughput, by Little's law).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from .diagram import FundamentalDiagram, SectionParams, demand, flow_profile, supply
from .errors import DomainError

__all__ = [
    "StationaryDistribution",
    "PerformanceReport",
    "SectionKind",
    "stationary_speed_form",
    "stationary_flow_form",
    "performance_measures",
    "outflow",
]


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    """A probability vector over occupancies 0..capacity.

    ``source`` records which computation produced the vector, one of
    "speed_form", "flow_form", "ctmc_oracle", "tandem_marginal",
    "tandem_conditional(n2=K)" or "tandem_joint".  ``rate`` is the arrival
    rate (veh/h) the vector was computed at, when one applies.
    """

    probs: np.ndarray
    capacity: int
    source: str
    rate: float | None = None

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float).copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if self.capacity < 1:
            raise DomainError(f"capacity must be at least 1, got {self.capacity}")
        if probs.shape != (self.capacity + 1,):
            raise DomainError(
                f"expected {self.capacity + 1} probabilities, got shape {probs.shape}"
            )
        if not np.all(probs >= 0.0):
            raise DomainError("stationary probabilities must be nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"probabilities must sum to 1, got {total!r}")

    @property
    def blocking(self) -> float:
        """Probability that the section is full."""
        return float(self.probs[-1])

    def mean(self) -> float:
        """Expected number of cars on the section."""
        return float(np.arange(self.capacity + 1) @ self.probs)

    def to_json_dict(self) -> dict:
        return {
            "capacity": self.capacity,
            "lambda": self.rate,
            "probs": [float(p) for p in self.probs],
            "source": self.source,
        }

    def to_csv_rows(self) -> Iterable[tuple[int, float]]:
        return [(n, float(p)) for n, p in enumerate(self.probs)]


@dataclass(frozen=True)
class PerformanceReport:
    """Steady-state performance of one section.

    ``expected_time`` (hours) is NaN with ``expected_time_defined`` False
    when the throughput is zero, which happens only at zero arrival rate.
    """

    blocking_probability: float
    throughput: float
    expected_count: float
    expected_time: float
    expected_time_defined: bool

    def to_json_dict(self) -> dict:
        return {
            "blocking_probability": self.blocking_probability,
            "throughput": self.throughput,
            "expected_count": self.expected_count,
            "expected_time": self.expected_time if self.expected_time_defined else None,
            "expected_time_defined": self.expected_time_defined,
        }


def _normalize_log_weights(log_w: np.ndarray, capacity: int, source: str, rate: float
                           ) -> StationaryDistribution:
    shifted = np.exp(log_w - log_w.max())
    probs = shifted / shifted.sum()
    return StationaryDistribution(probs, capacity, source, rate)


def _point_mass(capacity: int, source: str, rate: float) -> StationaryDistribution:
    probs = np.zeros(capacity + 1)
    probs[0] = 1.0
    return StationaryDistribution(probs, capacity, source, rate)


def stationary_speed_form(
    lam: float, p: SectionParams, profile: Callable[[int], float]
) -> StationaryDistribution:
    """Stationary occupancy distribution from a normalized speed profile.

    ``profile(i)`` must return v_i / v1 for 1 <= i <= capacity, with
    profile(1) == 1.
    """
    if lam < 0:
        raise DomainError(f"arrival rate must be nonnegative, got {lam}")
    c = p.capacity
    f = np.array([float(profile(i)) for i in range(1, c + 1)])
    if abs(f[0] - 1.0) > 1e-9:
        raise DomainError(f"speed profile must satisfy f(1) = 1, got {f[0]!r}")
    if not np.all(f > 0.0):
        raise DomainError("speed profile must be strictly positive up to capacity")
    if lam == 0.0:
        return _point_mass(c, "speed_form", lam)
    log_ratio = math.log(lam * p.length_km / p.free_speed_kmh)
    log_w = np.concatenate(
        ([0.0], np.cumsum(log_ratio - np.log(np.arange(1, c + 1) * f)))
    )
    return _normalize_log_weights(log_w, c, "speed_form", lam)


def stationary_flow_form(lam: float, d: FundamentalDiagram) -> StationaryDistribution:
    """Stationary occupancy distribution from the quadratic flow law.

    The occupancy is a birth-death chain with birth rate lambda and death
    rate q_n, so the stationary weights are running products of
    lambda / q_n.
    """
    if lam < 0:
        raise DomainError(f"arrival rate must be nonnegative, got {lam}")
    c = d.capacity
    if lam == 0.0:
        return _point_mass(c, "flow_form", lam)
    q = flow_profile(d)[1:]
    log_w = np.concatenate(([0.0], np.cumsum(math.log(lam) - np.log(q))))
    return _normalize_log_weights(log_w, c, "flow_form", lam)


def performance_measures(lam: float, dist: StationaryDistribution) -> PerformanceReport:
    """Blocking probability, throughput, expected count and expected time.

    Throughput is the accepted flow lambda * (1 - blocking).  Expected
    time follows from Little's law and is flagged undefined when the
    throughput is zero.
    """
    if lam < 0:
        raise DomainError(f"arrival rate must be nonnegative, got {lam}")
    blocking = dist.blocking
    throughput = lam * (1.0 - blocking)
    expected_count = dist.mean()
    if throughput > 0.0:
        return PerformanceReport(
            blocking, throughput, expected_count, expected_count / throughput, True
        )
    return PerformanceReport(blocking, throughput, expected_count, math.nan, False)


class SectionKind(Enum):
    """How a section's outflow is limited by its surroundings."""

    OPEN = "open"
    CONSTRAINED = "constrained"
    CLOSED = "closed"


def outflow(
    kind: SectionKind,
    n: int,
    d: FundamentalDiagram,
    downstream_supply: float | None = None,
) -> float:
    """Outflow (veh/h) of a section holding n cars.

    An open section sends its full demand; a constrained section sends the
    minimum of its demand and the downstream supply (which must be given);
    a closed section is limited by its own supply, which reduces to the
    flow law itself.
    """
    if kind is SectionKind.CONSTRAINED:
        if downstream_supply is None:
            raise DomainError("constrained outflow requires the downstream supply")
        if downstream_supply < 0:
            raise DomainError(
                f"downstream supply must be nonnegative, got {downstream_supply}"
            )
        return min(demand(n, d), downstream_supply)
    if downstream_supply is not None:
        raise DomainError(f"downstream supply is meaningless for {kind.value} sections")
    if kind is SectionKind.OPEN:
        return demand(n, d)
    if kind is SectionKind.CLOSED:
        return min(demand(n, d), supply(n, d))
    raise DomainError(f"unsupported section kind: {kind!r}")
