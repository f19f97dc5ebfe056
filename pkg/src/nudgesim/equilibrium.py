"""Effort incentives and optimal tagging policies.

The producer chooses effort once, before the platform's tag realizes, so a
policy implements an effort level only if that effort is a best response to
the belief distribution the policy induces. The first-order condition is the
vanishing of::

    E_tau[f(mu)],   f(mu) = mu * (mu - lam) / (lam * (1 - lam)) - 2 * k * lam

where ``tau`` is the induced belief distribution at effort ``lam``. The
fully informative policy yields the largest possible value of the first
term, ``(1 - eps0 - eps1) * (high - low)``, so positive effort is
implementable up to the root ``lambda_bar`` of::

    (1 - eps0 - eps1) * (high(lam) - low(lam)) = 2 * k * lam

Below that cap the platform keeps the producer honest by mixing the fully
informative policy with babbling; the induced belief distribution has
support {low, lam, high}. Optimality of a candidate distribution is
certified by an affine-in-constraints Lagrangian

    L(mu) = mu**2 + psi * f(mu) - phi * mu  <=  rho   on [low, high]

with equality on the support and ``psi <= 0``; the multipliers are fitted
by linear programming and polished to the exact linear-algebra solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from .errors import (
    ConfigError,
    InfeasibleError,
    InvalidEffortError,
    NoPositiveEffortError,
    NotOptimalError,
    NotPlausibleError,
)
from .game import (
    GameConfig,
    PosteriorDistribution,
    TaggingPolicy,
    feasible_interval,
    policy_to_posteriors,
)

__all__ = [
    "CostFunction",
    "IncentiveFunctional",
    "EffortBound",
    "LagrangianCertificate",
    "EquilibriumReport",
    "ic_residual",
    "feasibility_margin",
    "max_implementable_effort",
    "hybrid_distribution",
    "sender_value_of",
    "fully_informative_value",
    "fit_lagrangian",
    "verify_certificate",
    "optimal_policy",
]

#: Mixture weights at most this size are dropped when a support point dies.
WEIGHT_DROP_TOL = 1e-9

#: Bisection continues until the bracket is this narrow.
EFFORT_ROOT_TOL = 1e-13


@dataclass(frozen=True)
class CostFunction:
    """Quadratic effort cost ``k * lam**2`` with supercritical slope."""

    k: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.k) or self.k <= 0.5:
            raise ConfigError(
                f"cost coefficient must exceed 0.5, got {self.k!r}"
            )

    def value(self, effort: float) -> float:
        return self.k * effort * effort

    def gradient(self, effort: float) -> float:
        return 2.0 * self.k * effort

    @classmethod
    def from_config(cls, config: GameConfig) -> "CostFunction":
        return cls(config.k)


@dataclass(frozen=True)
class IncentiveFunctional:
    """Pointwise integrand of the producer's first-order condition."""

    config: GameConfig
    effort: float

    def __post_init__(self) -> None:
        effort = float(self.effort)
        if not math.isfinite(effort) or not 0.0 < effort < 1.0:
            raise InvalidEffortError(
                f"incentives are defined for effort in (0, 1), got {effort!r}"
            )
        object.__setattr__(self, "effort", effort)

    def value(self, belief: float) -> float:
        lam = self.effort
        return belief * (belief - lam) / (lam * (1.0 - lam)) - self.config.k * 2.0 * lam

    def derivative(self, belief: float) -> float:
        lam = self.effort
        return (2.0 * belief - lam) / (lam * (1.0 - lam))

    @property
    def curvature(self) -> float:
        return 2.0 / (self.effort * (1.0 - self.effort))

    def expectation(self, tau: PosteriorDistribution) -> float:
        return tau.expect(self.value)


def ic_residual(config: GameConfig, effort: float, tau: PosteriorDistribution) -> float:
    """First-order condition residual; zero when effort is a best response."""
    return IncentiveFunctional(config, effort).expectation(tau)


def feasibility_margin(config: GameConfig, effort: float) -> float:
    """Headroom of the strongest incentive over marginal cost at this effort.

    Positive margin means some policy sustains strictly more than ``effort``;
    the margin at 1 is always negative, so the root caps implementable effort.
    """
    interval = feasible_interval(config, effort)
    determinant = 1.0 - config.eps0 - config.eps1
    return determinant * (interval.high - interval.low) - 2.0 * config.k * effort


class EffortBound(NamedTuple):
    value: float
    no_positive_effort: bool


def max_implementable_effort(config: GameConfig) -> EffortBound:
    """Largest effort any tagging policy can sustain.

    Bisects the feasibility margin on [1e-8, 1]. When the margin is already
    nonpositive at the left end, no positive effort survives the detector's
    noise and the bound is flagged as degenerate.
    """
    lo, hi = 1e-8, 1.0
    if feasibility_margin(config, lo) <= 0.0:
        return EffortBound(0.0, True)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if feasibility_margin(config, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < EFFORT_ROOT_TOL:
            break
    return EffortBound(0.5 * (lo + hi), False)


def hybrid_distribution(config: GameConfig, effort: float) -> PosteriorDistribution:
    """Belief distribution of the revealing/babbling mix holding effort fixed.

    Scales the fully informative endpoints by the ratio of marginal cost to
    the strongest incentive and parks the remaining mass on the prior mean,
    which keeps the first-order condition exactly satisfied. Infeasible when
    the effort exceeds the implementable cap. Zero effort collapses to a
    point mass at belief zero.
    """
    if effort == 0.0:
        return PosteriorDistribution.point(0.0)
    functional = IncentiveFunctional(config, effort)  # validates the range
    lam = functional.effort
    interval = feasible_interval(config, lam)
    determinant = 1.0 - config.eps0 - config.eps1
    strongest = determinant * (interval.high - interval.low)
    if strongest <= 0.0:
        raise InfeasibleError("detector induces a degenerate belief interval")
    ratio = 2.0 * config.k * lam / strongest
    if ratio > 1.0 + 1e-9:
        raise InfeasibleError(
            f"effort {lam!r} exceeds the implementable cap (ratio {ratio!r})"
        )
    ratio = min(ratio, 1.0)
    pairs = [
        (interval.low, interval.weight_low * ratio),
        (lam, 1.0 - ratio),
        (interval.high, interval.weight_high * ratio),
    ]
    return PosteriorDistribution.from_pairs(pairs, drop_tol=WEIGHT_DROP_TOL)


def sender_value_of(tau: PosteriorDistribution) -> float:
    """Platform value of a belief distribution."""
    return tau.expect(lambda mu: mu * mu)


def fully_informative_value(config: GameConfig, effort: float) -> float:
    """Platform value when the tag always equals the perceived state."""
    tau = policy_to_posteriors(config, effort, TaggingPolicy.fully_informative())
    return sender_value_of(tau)


@dataclass(frozen=True)
class LagrangianCertificate:
    """Multipliers proving a belief distribution optimal, with fit diagnostics.

    ``max_violation`` is the largest amount by which L exceeds rho on the
    verification grid; ``support_residual`` is the largest |L - rho| on the
    candidate's support.
    """

    psi: float
    phi: float
    rho: float
    max_violation: float
    support_residual: float
    grid_size: int

    def evaluate(self, config: GameConfig, effort: float, belief: float) -> float:
        f = IncentiveFunctional(config, effort).value(belief)
        return belief * belief + self.psi * f - self.phi * belief

    def certified_value(self, effort: float) -> float:
        """Upper bound on any implementable distribution's platform value."""
        return self.rho + self.phi * effort


def verify_certificate(
    config: GameConfig,
    effort: float,
    tau: PosteriorDistribution,
    psi: float,
    phi: float,
    rho: float,
    grid_size: int = 1000,
) -> tuple[float, float]:
    """Recheck a multiplier triple on a fresh grid.

    Returns (max violation of L <= rho over the feasible interval, largest
    |L - rho| on the support).
    """
    functional = IncentiveFunctional(config, effort)
    interval = feasible_interval(config, functional.effort)
    grid = np.linspace(interval.low, interval.high, grid_size)
    f_grid = (
        grid * (grid - functional.effort)
        / (functional.effort * (1.0 - functional.effort))
        - 2.0 * config.k * functional.effort
    )
    lagr = grid * grid + psi * f_grid - phi * grid
    max_violation = float(max(0.0, np.max(lagr - rho)))
    support_residual = max(
        abs(mu * mu + psi * functional.value(mu) - phi * mu - rho)
        for mu in tau.support
    )
    return max_violation, float(support_residual)


def _polish_multipliers(
    functional: IncentiveFunctional,
    tau: PosteriorDistribution,
    psi_lp: float,
) -> tuple[float, float, float]:
    # Support equalities are linear in (psi, phi, rho); with three support
    # points they pin the triple down exactly, with fewer we keep the LP's
    # psi and solve the remaining square system.
    support = tau.support
    if len(support) >= 3:
        a = np.array([[functional.value(mu), -mu, -1.0] for mu in support])
        b = np.array([-mu * mu for mu in support])
        try:
            psi, phi, rho = np.linalg.solve(a[:3], b[:3])
        except np.linalg.LinAlgError:
            psi, phi, rho = np.linalg.lstsq(a, b, rcond=None)[0]
        return float(min(psi, 0.0)), float(phi), float(rho)
    psi = min(psi_lp, 0.0)
    if len(support) == 2:
        a = np.array([[-mu, -1.0] for mu in support])
        b = np.array([-mu * mu - psi * functional.value(mu) for mu in support])
        phi, rho = np.linalg.solve(a, b)
        return psi, float(phi), float(rho)
    (mu,) = support
    # Degenerate support: stationarity at the single point fixes phi.
    phi = 2.0 * mu + psi * functional.derivative(mu)
    rho = mu * mu + psi * functional.value(mu) - phi * mu
    return psi, float(phi), float(rho)


def fit_lagrangian(
    config: GameConfig,
    effort: float,
    tau: PosteriorDistribution,
    grid_size: int = 1000,
) -> LagrangianCertificate:
    """Fit certificate multipliers for a candidate belief distribution.

    Solves a linear program over (psi, phi, rho) with the ceiling constraint
    discretized on ``grid_size`` points and equality pinned on the support,
    then polishes the multipliers through the support equalities and
    verifies the polished triple. Raises NotOptimalError when no certificate
    exists, which means the candidate does not maximize the platform value.
    """
    functional = IncentiveFunctional(config, effort)
    lam = functional.effort
    if abs(tau.mean() - lam) > 1e-9:
        raise NotPlausibleError(
            f"posterior mean {tau.mean()!r} does not match effort {lam!r}"
        )
    if functional.expectation(tau) < -1e-9:
        raise NotOptimalError(
            "candidate violates the incentive constraint: the producer would "
            f"deviate below effort {lam!r}"
        )
    interval = feasible_interval(config, lam)
    for mu in tau.support:
        if mu < interval.low - 1e-9 or mu > interval.high + 1e-9:
            raise InfeasibleError(
                f"support point {mu!r} outside [{interval.low!r}, {interval.high!r}]"
            )

    grid = np.linspace(interval.low, interval.high, grid_size)
    f_grid = grid * (grid - lam) / (lam * (1.0 - lam)) - 2.0 * config.k * lam
    a_ub = np.column_stack([f_grid, -grid, -np.ones_like(grid)])
    b_ub = -grid * grid
    support = np.array(tau.support)
    f_sup = support * (support - lam) / (lam * (1.0 - lam)) - 2.0 * config.k * lam
    a_eq = np.column_stack([f_sup, -support, -np.ones_like(support)])
    b_eq = -support * support
    result = linprog(
        c=[0.0, 0.0, 1.0],
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(None, 0.0), (None, None), (None, None)],
        method="highs",
    )
    if not result.success:
        raise NotOptimalError(
            "no Lagrangian certificate exists for this distribution: "
            + result.message
        )
    psi, phi, rho = _polish_multipliers(functional, tau, result.x[0])
    max_violation, support_residual = verify_certificate(
        config, lam, tau, psi, phi, rho, grid_size
    )
    if max_violation > 1e-6:
        # The polished triple should only ever tighten the LP solution; a
        # gross violation here means the candidate was not optimal.
        raise NotOptimalError(
            f"certificate violated by {max_violation!r} after polishing"
        )
    return LagrangianCertificate(
        psi, phi, rho, max_violation, support_residual, grid_size
    )


@dataclass(frozen=True)
class EquilibriumReport:
    """Platform optimum: the effort cap, revealing policy, and certificate.

    ``residuals`` holds the plausibility residual and the first-order
    incentive residual of the reported distribution, both near zero.
    """

    lambda_bar: float
    policy: TaggingPolicy
    tau: PosteriorDistribution
    sender_value: float
    certificate: LagrangianCertificate
    residuals: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "lambda_bar": self.lambda_bar,
            "kernel": [list(row) for row in self.policy.kernel],
            "support": list(self.tau.support),
            "weights": list(self.tau.weights),
            "sender_value": self.sender_value,
            "certificate": {
                "psi": self.certificate.psi,
                "phi": self.certificate.phi,
                "rho": self.certificate.rho,
                "max_violation": self.certificate.max_violation,
                "support_residual": self.certificate.support_residual,
                "grid_size": self.certificate.grid_size,
            },
            "residuals": {
                "plausibility": self.residuals[0],
                "incentive": self.residuals[1],
            },
        }


def optimal_policy(config: GameConfig, grid_size: int = 1000) -> EquilibriumReport:
    """Overall platform optimum: full revelation at the effort cap.

    The revealing policy's value increases in the implemented effort while
    holding any effort below the cap requires garbling, which can only
    lower the value; both halves of that dominance chain are re-checked on
    a coarse effort grid before the report is assembled.
    """
    bound = max_implementable_effort(config)
    if bound.no_positive_effort:
        raise NoPositiveEffortError(
            "detector too noisy: no tagging policy sustains positive effort"
        )
    cap = bound.value
    value_at_cap = fully_informative_value(config, cap)
    for lam in np.linspace(cap / 50.0, cap, 50):
        revealing = fully_informative_value(config, lam)
        if revealing > value_at_cap + 1e-9:
            raise NotOptimalError(
                f"revealing value at effort {lam!r} exceeds the cap value"
            )
        if sender_value_of(hybrid_distribution(config, lam)) > revealing + 1e-9:
            raise NotOptimalError(
                f"garbled value at effort {lam!r} exceeds the revealing value"
            )
    policy = TaggingPolicy.fully_informative()
    tau = policy_to_posteriors(config, cap, policy)
    certificate = fit_lagrangian(config, cap, tau, grid_size)
    return EquilibriumReport(
        lambda_bar=cap,
        policy=policy,
        tau=tau,
        sender_value=sender_value_of(tau),
        certificate=certificate,
        residuals=(tau.mean() - cap, ic_residual(config, cap, tau)),
    )
