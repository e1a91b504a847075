"""Deterministic traffic laws for a single road section.

A section of length L (km) holds at most c = round(L * rho_j) cars, where
rho_j is the jam density (veh/km).  Car speed decreases with the number of
cars n on the section.  Two speed laws are supported:

* linear:       v_n = v1 * (c - n + 1) / c
* exponential:  v_n = v1 * exp(-((n - 1) / beta) ** gamma)

Under the linear speed law the flow q_n = n * v_n / L is a quadratic
function of the count,

    q_n = q_max * (1 - ((c - 2n + 1) / (c + 1)) ** 2),

with vertex q_max = v1 / (L * c) * ((c + 1) / 2) ** 2 at the critical
count (c + 1) / 2.  The demand of a section (the flow it offers to the
downstream) follows the rising branch of the flow law and saturates at
q_max; the supply (the flow it can absorb) starts at q_max and follows
the falling branch.  The minimum of demand and supply at the same count
recovers the flow law itself.

Unit conventions, used throughout the package:

    lengths in km, speeds in km/h, densities in veh/km, flows in veh/h,
    times in hours.

All types here are immutable and all functions are pure, so values can be
shared freely across threads or processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "SectionParams",
    "LinearQuadratic",
    "Exponential",
    "FundamentalDiagram",
    "linear_speed",
    "exponential_speed",
    "fit_beta_gamma",
    "quadratic_flow",
    "demand",
    "supply",
    "normalized_service_rate",
    "flow_profile",
    "demand_profile",
    "supply_profile",
    "speed_profile",
    "section_from_json",
]


@dataclass(frozen=True)
class SectionParams:
    """Physical description of one road section.

    The capacity (maximum number of cars the section can hold) is derived
    from length and jam density and must be a whole number: construction
    fails when ``length_km * jam_density_veh_per_km`` is further than 1e-9
    from the nearest integer.
    """

    length_km: float
    free_speed_kmh: float
    jam_density_veh_per_km: float
    capacity: int = field(init=False)

    def __post_init__(self) -> None:
        if self.length_km <= 0:
            raise DomainError(f"section length must be positive, got {self.length_km}")
        if self.free_speed_kmh <= 0:
            raise DomainError(f"free speed must be positive, got {self.free_speed_kmh}")
        if self.jam_density_veh_per_km <= 0:
            raise DomainError(
                f"jam density must be positive, got {self.jam_density_veh_per_km}"
            )
        cars = self.length_km * self.jam_density_veh_per_km
        cap = round(cars)
        if cap < 1 or abs(cars - cap) > 1e-9:
            raise DomainError(
                "length * jam density must be a whole number of cars, "
                f"got {cars!r}"
            )
        object.__setattr__(self, "capacity", int(cap))


@dataclass(frozen=True)
class LinearQuadratic:
    """Linear speed law, equivalently a quadratic flow law."""


@dataclass(frozen=True)
class Exponential:
    """Exponential speed law with scale ``beta`` and shape ``gamma``."""

    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if self.beta <= 0 or self.gamma <= 0:
            raise DomainError(
                f"beta and gamma must be positive, got ({self.beta}, {self.gamma})"
            )


SpeedModel = Union[LinearQuadratic, Exponential]


def _vertex_flow(p: SectionParams) -> float:
    # peak of the quadratic flow law, reached at the critical count (c+1)/2
    c = p.capacity
    return p.free_speed_kmh / (p.length_km * c) * ((c + 1) / 2.0) ** 2


@dataclass(frozen=True)
class FundamentalDiagram:
    """A section together with its speed model and peak flow.

    ``q_max`` defaults to the vertex of the quadratic flow law.  Passing an
    explicit value overrides the default everywhere the diagram is used
    (flow, demand, supply and the service rates derived from them).
    """

    params: SectionParams
    model: SpeedModel = LinearQuadratic()
    q_max: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.model, (LinearQuadratic, Exponential)):
            raise DomainError(f"unsupported speed model: {self.model!r}")
        if self.q_max is None:
            object.__setattr__(self, "q_max", _vertex_flow(self.params))
        elif not self.q_max > 0:
            raise DomainError(f"q_max must be positive, got {self.q_max}")

    @property
    def capacity(self) -> int:
        return self.params.capacity


def linear_speed(n: int, p: SectionParams) -> float:
    """Speed (km/h) with n cars present under the linear law."""
    if not 1 <= n <= p.capacity:
        raise DomainError(f"car count must lie in [1, {p.capacity}], got {n}")
    c = p.capacity
    return p.free_speed_kmh * (c - n + 1) / c


def exponential_speed(n: int, free_speed_kmh: float, beta: float, gamma: float) -> float:
    """Speed (km/h) with n cars present under the exponential law."""
    if n < 1:
        raise DomainError(f"car count must be at least 1, got {n}")
    if free_speed_kmh <= 0:
        raise DomainError(f"free speed must be positive, got {free_speed_kmh}")
    if beta <= 0 or gamma <= 0:
        raise DomainError(f"beta and gamma must be positive, got ({beta}, {gamma})")
    return free_speed_kmh * math.exp(-(((n - 1) / beta) ** gamma))


def fit_beta_gamma(
    free_speed_kmh: float, a: float, va: float, b: float, vb: float
) -> tuple[float, float]:
    """Fit the exponential speed law through two anchor points.

    Given speeds ``va`` at count ``a`` and ``vb`` at count ``b`` (with
    1 < a < b and 0 < vb < va < free speed), returns the unique (beta,
    gamma) pair whose exponential law passes through both anchors.
    """
    if not 1 < a < b:
        raise DomainError(f"anchor counts must satisfy 1 < a < b, got ({a}, {b})")
    if not 0 < vb < va < free_speed_kmh:
        raise DomainError(
            "anchor speeds must satisfy 0 < vb < va < v1, got "
            f"vb={vb}, va={va}, v1={free_speed_kmh}"
        )
    # both logs are negative, so the ratio inside the outer log is positive
    gamma = math.log(
        math.log(va / free_speed_kmh) / math.log(vb / free_speed_kmh)
    ) / math.log((a - 1) / (b - 1))
    beta = (a - 1) / math.log(free_speed_kmh / va) ** (1.0 / gamma)
    return beta, gamma


def _require_quadratic(d: FundamentalDiagram, op: str) -> None:
    if not isinstance(d.model, LinearQuadratic):
        raise DomainError(f"{op} is defined for the quadratic flow model only")


def quadratic_flow(n: int, d: FundamentalDiagram) -> float:
    """Flow (veh/h) with n cars present under the quadratic law."""
    _require_quadratic(d, "quadratic_flow")
    c = d.capacity
    if not 0 <= n <= c:
        raise DomainError(f"car count must lie in [0, {c}], got {n}")
    return d.q_max * (1.0 - ((c - 2.0 * n + 1.0) / (c + 1.0)) ** 2)


def demand(n: int, d: FundamentalDiagram) -> float:
    """Flow (veh/h) the section offers downstream with n cars present.

    Rises with the flow law up to the critical count, then stays at q_max.
    """
    _require_quadratic(d, "demand")
    c = d.capacity
    if not 0 <= n <= c:
        raise DomainError(f"car count must lie in [0, {c}], got {n}")
    if n <= (c + 1) / 2.0:
        return quadratic_flow(n, d)
    return d.q_max


def supply(n: int, d: FundamentalDiagram) -> float:
    """Flow (veh/h) the section can absorb with n cars present.

    Stays at q_max up to the critical count, then falls with the flow law.
    Strictly positive for every n up to the capacity.
    """
    _require_quadratic(d, "supply")
    c = d.capacity
    if not 0 <= n <= c:
        raise DomainError(f"car count must lie in [0, {c}], got {n}")
    if n <= (c + 1) / 2.0:
        return d.q_max
    return quadratic_flow(n, d)


def normalized_service_rate(i: int, d: FundamentalDiagram) -> float:
    """Per-car service factor (q_i / q_max) / i of the occupancy chain."""
    _require_quadratic(d, "normalized_service_rate")
    if not 1 <= i <= d.capacity:
        raise DomainError(f"car count must lie in [1, {d.capacity}], got {i}")
    return quadratic_flow(i, d) / d.q_max / i


def flow_profile(d: FundamentalDiagram) -> np.ndarray:
    """Quadratic flow at every count 0..c as an array (veh/h)."""
    _require_quadratic(d, "flow_profile")
    c = d.capacity
    n = np.arange(c + 1, dtype=float)
    return d.q_max * (1.0 - ((c - 2.0 * n + 1.0) / (c + 1.0)) ** 2)


def demand_profile(d: FundamentalDiagram) -> np.ndarray:
    """Demand at every count 0..c as an array (veh/h)."""
    q = flow_profile(d)
    c = d.capacity
    n = np.arange(c + 1, dtype=float)
    return np.where(n <= (c + 1) / 2.0, q, d.q_max)


def supply_profile(d: FundamentalDiagram) -> np.ndarray:
    """Supply at every count 0..c as an array (veh/h)."""
    q = flow_profile(d)
    c = d.capacity
    n = np.arange(c + 1, dtype=float)
    return np.where(n <= (c + 1) / 2.0, d.q_max, q)


def speed_profile(d: FundamentalDiagram) -> Callable[[int], float]:
    """Normalized speed profile f(i) = v_i / v1 for the diagram's model."""
    p = d.params
    if isinstance(d.model, LinearQuadratic):
        c = p.capacity
        return lambda i: (c - i + 1) / c
    beta, gamma = d.model.beta, d.model.gamma
    return lambda i: math.exp(-(((i - 1) / beta) ** gamma))


_SECTION_KEYS = {
    "length_km",
    "free_speed_kmh",
    "jam_density_veh_per_km",
    "q_max_override_veh_per_h",
    "model",
}


def section_from_json(doc: dict) -> FundamentalDiagram:
    """Build a diagram from its JSON description.

    Expected shape::

        {"length_km": 0.1, "free_speed_kmh": 100.0,
         "jam_density_veh_per_km": 180.0,
         "q_max_override_veh_per_h": 5000.0,          # optional
         "model": "linear"}                            # or
        {"model": {"exponential": {"beta": 19.0, "gamma": 1.0}}}
    """
    if not isinstance(doc, dict):
        raise ConfigError(f"section description must be an object, got {type(doc).__name__}")
    unknown = set(doc) - _SECTION_KEYS
    if unknown:
        raise ConfigError(f"unknown section keys: {sorted(unknown)}")
    for key in ("length_km", "free_speed_kmh", "jam_density_veh_per_km"):
        if key not in doc:
            raise ConfigError(f"section description missing {key!r}")
        if not isinstance(doc[key], (int, float)) or isinstance(doc[key], bool):
            raise ConfigError(f"section key {key!r} must be a number")
    model_doc = doc.get("model", "linear")
    model: SpeedModel
    if model_doc == "linear":
        model = LinearQuadratic()
    elif isinstance(model_doc, dict) and set(model_doc) == {"exponential"}:
        exp = model_doc["exponential"]
        if not isinstance(exp, dict) or set(exp) != {"beta", "gamma"}:
            raise ConfigError('exponential model needs {"beta": ..., "gamma": ...}')
        try:
            model = Exponential(float(exp["beta"]), float(exp["gamma"]))
        except DomainError as err:
            raise ConfigError(str(err)) from err
    else:
        raise ConfigError(f"unsupported model description: {model_doc!r}")
    override = doc.get("q_max_override_veh_per_h")
    if override is not None and (
        not isinstance(override, (int, float)) or isinstance(override, bool)
    ):
        raise ConfigError("q_max_override_veh_per_h must be a number")
    try:
        params = SectionParams(
            float(doc["length_km"]),
            float(doc["free_speed_kmh"]),
            float(doc["jam_density_veh_per_km"]),
        )
        return FundamentalDiagram(
            params, model, None if override is None else float(override)
        )
    except DomainError as err:
        raise ConfigError(str(err)) from err
