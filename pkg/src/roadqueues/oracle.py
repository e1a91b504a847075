"""Exact continuous-time Markov chain references.

Everything in this module is deliberately independent of the stationary
formulas in ``section`` and ``tandem``: the birth-death reference uses a
scaled product recursion rather than log-domain sums, and the joint
two-section chain is assembled as an explicit generator and solved as a
dense linear system.  The decomposition can then be measured against the
exact joint behaviour instead of against itself.

In the joint chain a car moves downstream at rate
min(demand_1(n1), supply_2(n2)) while the downstream section has room,
and the move is forbidden outright when the downstream section is full
(even though its supply stays positive there).  Departures from the
downstream section follow its flow law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagram import demand_profile, flow_profile, supply_profile
from .errors import DomainError
from .section import StationaryDistribution
from .tandem import TandemConfig, solve_bisection

__all__ = [
    "CtmcSpec",
    "birth_death_stationary",
    "joint_spec",
    "joint_tandem_stationary",
    "total_variation",
    "comparison_report",
    "MAX_JOINT_STATES",
]

MAX_JOINT_STATES = 40_000

RESIDUAL_BOUND = 1e-10


@dataclass(frozen=True, eq=False)
class CtmcSpec:
    """A finite continuous-time Markov chain given by explicit rates.

    ``states`` enumerates the state space; ``rates`` maps ordered pairs of
    states to positive transition rates.  Self-loops are rejected.
    """

    states: tuple
    rates: dict

    def __post_init__(self) -> None:
        index = {s: k for k, s in enumerate(self.states)}
        if len(index) != len(self.states):
            raise DomainError("chain states must be unique")
        for (src, dst), rate in self.rates.items():
            if src == dst:
                raise DomainError(f"self-loop on state {src!r}")
            if src not in index or dst not in index:
                raise DomainError(f"transition {src!r} -> {dst!r} leaves the state space")
            if rate < 0:
                raise DomainError(f"negative rate {rate} on {src!r} -> {dst!r}")

    def generator(self) -> np.ndarray:
        """Dense generator matrix: off-diagonal rates, rows sum to zero."""
        index = {s: k for k, s in enumerate(self.states)}
        n = len(self.states)
        gen = np.zeros((n, n))
        for (src, dst), rate in self.rates.items():
            gen[index[src], index[dst]] += rate
        np.fill_diagonal(gen, gen.diagonal() - gen.sum(axis=1))
        return gen

    def stationary(self) -> tuple[np.ndarray, float]:
        """Stationary vector and the residual max |pi Q| of the solve.

        Solves the balance equations with one of them replaced by the
        normalization row.
        """
        gen = self.generator()
        n = gen.shape[0]
        system = gen.T.copy()
        system[0, :] = 1.0
        rhs = np.zeros(n)
        rhs[0] = 1.0
        pi = np.linalg.solve(system, rhs)
        residual = float(np.abs(pi @ gen).max())
        if pi.min() < -1e-12:
            raise DomainError(
                f"stationary solve produced a negative probability {pi.min()!r}"
            )
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        return pi, residual


def birth_death_stationary(lam: float, death_rates) -> StationaryDistribution:
    """Stationary distribution of a birth-death chain with constant births.

    ``death_rates[k]`` is the death rate out of state k+1, so the chain
    lives on 0..len(death_rates).  Uses a scaled product recursion, which
    keeps it an independent cross-check of the log-domain formulas.
    """
    rates = [float(r) for r in death_rates]
    if not rates:
        raise DomainError("at least one death rate is required")
    if any(r <= 0 for r in rates):
        raise DomainError("death rates must be strictly positive")
    if lam < 0:
        raise DomainError(f"arrival rate must be nonnegative, got {lam}")
    capacity = len(rates)
    if lam == 0.0:
        probs = np.zeros(capacity + 1)
        probs[0] = 1.0
        return StationaryDistribution(probs, capacity, "ctmc_oracle", lam)
    # detailed balance: weight(k) = weight(k-1) * lam / rate(k), carrying an
    # explicit exponent so extreme products stay representable
    mantissa, exponent = 1.0, 0.0
    pairs = [(mantissa, exponent)]
    for rate in rates:
        mantissa *= lam / rate
        if mantissa == 0.0 or not math.isfinite(mantissa):
            raise DomainError("birth/death rate ratio outside the float range")
        if not 1e-100 <= mantissa <= 1e100:
            exponent += math.log(mantissa)
            mantissa = 1.0
        pairs.append((mantissa, exponent))
    top = max(e + math.log(m) for m, e in pairs)
    probs = np.array([m * math.exp(e - top) for m, e in pairs])
    probs /= probs.sum()
    return StationaryDistribution(probs, capacity, "ctmc_oracle", lam)


def joint_spec(cfg: TandemConfig) -> CtmcSpec:
    """Explicit chain over (upstream count, downstream count) pairs.

    Transitions: arrivals at rate lambda while the upstream has room, a
    transfer of one car at rate min(demand_1(n1), supply_2(n2)) while the
    downstream has room, and downstream departures at its flow rate.
    """
    c1 = cfg.section1.capacity
    c2 = cfg.section2.capacity
    lam = cfg.arrival_rate
    dem1 = demand_profile(cfg.section1)
    sup2 = supply_profile(cfg.section2)
    q2 = flow_profile(cfg.section2)
    states = tuple((n1, n2) for n1 in range(c1 + 1) for n2 in range(c2 + 1))
    rates: dict = {}
    for n1, n2 in states:
        if n1 < c1 and lam > 0.0:
            rates[((n1, n2), (n1 + 1, n2))] = lam
        if n1 > 0 and n2 < c2:
            rates[((n1, n2), (n1 - 1, n2 + 1))] = min(dem1[n1], sup2[n2])
        if n2 > 0:
            rates[((n1, n2), (n1, n2 - 1))] = q2[n2]
    return CtmcSpec(states, rates)


def joint_tandem_stationary(cfg: TandemConfig) -> np.ndarray:
    """Exact stationary joint occupancy matrix of the two-section chain.

    Returns a (c1+1) x (c2+1) matrix indexed by (upstream count,
    downstream count).  Uses a dense solve, so the state space is capped
    at 40 000 states.
    """
    c1 = cfg.section1.capacity
    c2 = cfg.section2.capacity
    n_states = (c1 + 1) * (c2 + 1)
    if n_states > MAX_JOINT_STATES:
        raise DomainError(
            f"joint chain has {n_states} states, above the dense-solve cap "
            f"{MAX_JOINT_STATES}"
        )
    if cfg.arrival_rate == 0.0:
        joint = np.zeros((c1 + 1, c2 + 1))
        joint[0, 0] = 1.0
        return joint
    pi, residual = joint_spec(cfg).stationary()
    if residual > RESIDUAL_BOUND:
        raise DomainError(
            f"joint stationary solve residual {residual} exceeds {RESIDUAL_BOUND}"
        )
    return pi.reshape(c1 + 1, c2 + 1)


def total_variation(p, q) -> float:
    """Total variation distance between two distributions on the same support."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError(f"distributions differ in shape: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def comparison_report(cfg: TandemConfig, tol: float | None = None) -> dict:
    """Measure the decomposition against the exact joint chain.

    Returns the arrival rate, total variation distances between the
    decomposition's marginals and the exact ones, the decomposition's
    transfer rate and the exact flow-balance throughput.
    """
    solution = solve_bisection(cfg, tol)
    joint = joint_tandem_stationary(cfg)
    marginal1 = joint.sum(axis=1)
    marginal2 = joint.sum(axis=0)

    c1 = cfg.section1.capacity
    c2 = cfg.section2.capacity
    dem1 = demand_profile(cfg.section1)
    sup2 = supply_profile(cfg.section2)
    transfer = np.minimum(dem1[:, None], sup2[None, :])
    mask = np.zeros_like(joint)
    mask[1:, :c2] = 1.0  # moves need a car upstream and room downstream
    theta_joint = float((joint * transfer * mask).sum())

    return {
        "lambda": cfg.arrival_rate,
        "tv_p1": total_variation(solution.p1.probs, marginal1),
        "tv_p2": total_variation(solution.p2.probs, marginal2),
        "theta_decomposition": solution.transfer_rate,
        "theta_joint": theta_joint,
    }
