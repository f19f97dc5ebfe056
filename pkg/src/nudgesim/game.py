"""Binary-state tagging game under noisy authenticity detection.

Conventions used throughout the package:

- The hidden state is binary: 1 means a post is authentic, 0 means it is fake.
  A content producer's effort ``lam`` in [0, 1] is the prior probability of
  the authentic state.
- The platform does not observe the state directly. Its detector reports a
  perceived state with class-conditional error rates ``eps0`` (fake perceived
  as authentic) and ``eps1`` (authentic perceived as fake). The channel is
  the column-stochastic matrix ``[[1-eps0, eps1], [eps0, 1-eps1]]`` with
  columns indexed by the true state; its determinant ``1 - eps0 - eps1`` must
  be positive, so the detector is informative.
- A tagging policy maps the perceived state to a distribution over the binary
  tag; it is a row-stochastic 2x2 kernel with rows indexed by the perceived
  state and columns by the tag.
- A belief is the scalar probability assigned to the authentic state after
  seeing a tag. Users best-respond to a belief ``mu`` with comment positivity
  ``mu``, the producer's payoff per impression is ``mu``, and the platform
  values a belief at ``mu**2``.

The central objects are the posterior map (tag -> belief, marginal), its
closed-form range (the feasible belief interval), and the two directions of
the policy <-> posterior-distribution correspondence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import (
    ConfigError,
    InfeasibleError,
    InvalidEffortError,
    NotPlausibleError,
    NullSignalError,
)

__all__ = [
    "GameConfig",
    "MisperceptionMatrix",
    "TaggingPolicy",
    "PosteriorDistribution",
    "FeasibleInterval",
    "prior_of",
    "posterior",
    "feasible_interval",
    "policy_to_posteriors",
    "posteriors_to_policy",
    "receiver_best_response",
    "receiver_utility",
    "agent_belief_payoff",
    "sender_belief_value",
]

#: Two beliefs closer than this are treated as the same posterior.
BELIEF_MERGE_TOL = 1e-10

#: Posterior means must match the prior mean this tightly.
PLAUSIBILITY_TOL = 1e-10


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def _check_effort(effort: float, *, open_interval: bool = False) -> float:
    effort = float(effort)
    if not math.isfinite(effort) or not 0.0 <= effort <= 1.0:
        raise InvalidEffortError(f"effort must lie in [0, 1], got {effort!r}")
    if open_interval and not 0.0 < effort < 1.0:
        raise InvalidEffortError(
            f"effort must lie strictly inside (0, 1), got {effort!r}"
        )
    return effort


@dataclass(frozen=True)
class GameConfig:
    """Detection error rates and the effort cost coefficient.

    ``cost(lam) = k * lam**2`` with ``k > 0.5`` so that marginal cost at full
    effort exceeds the best possible marginal belief gain.
    """

    eps0: float
    eps1: float
    k: float

    def __post_init__(self) -> None:
        eps0 = _check_unit("eps0", self.eps0)
        eps1 = _check_unit("eps1", self.eps1)
        if eps0 + eps1 >= 1.0:
            raise ConfigError(
                f"detector must be informative: eps0 + eps1 < 1, got {eps0 + eps1}"
            )
        k = float(self.k)
        if not math.isfinite(k) or k <= 0.5:
            raise ConfigError(f"cost coefficient k must exceed 0.5, got {self.k!r}")
        object.__setattr__(self, "eps0", eps0)
        object.__setattr__(self, "eps1", eps1)
        object.__setattr__(self, "k", k)

    @property
    def misperception(self) -> "MisperceptionMatrix":
        return MisperceptionMatrix(self.eps0, self.eps1)


@dataclass(frozen=True)
class MisperceptionMatrix:
    """Column-stochastic detection channel, columns indexed by the true state."""

    eps0: float
    eps1: float

    def __post_init__(self) -> None:
        eps0 = _check_unit("eps0", self.eps0)
        eps1 = _check_unit("eps1", self.eps1)
        if eps0 + eps1 >= 1.0:
            raise ConfigError(
                f"misperception must satisfy eps0 + eps1 < 1, got {eps0 + eps1}"
            )

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[1.0 - self.eps0, self.eps1], [self.eps0, 1.0 - self.eps1]], float
        )

    @property
    def determinant(self) -> float:
        return 1.0 - self.eps0 - self.eps1

    @classmethod
    def from_config(cls, config: GameConfig) -> "MisperceptionMatrix":
        return cls(config.eps0, config.eps1)


def prior_of(effort: float) -> np.ndarray:
    """Prior over (fake, authentic) induced by the producer's effort."""
    effort = _check_effort(effort)
    return np.array([1.0 - effort, effort], float)


@dataclass(frozen=True)
class TaggingPolicy:
    """Row-stochastic kernel from the perceived state to the binary tag."""

    kernel: np.ndarray

    def __post_init__(self) -> None:
        kernel = np.array(self.kernel, dtype=float)
        if kernel.shape != (2, 2):
            raise ConfigError(f"kernel must be 2x2, got shape {kernel.shape}")
        if not np.all(np.isfinite(kernel)):
            raise ConfigError("kernel entries must be finite")
        if kernel.min() < -1e-12 or kernel.max() > 1.0 + 1e-12:
            raise ConfigError("kernel entries must lie in [0, 1]")
        sums = kernel.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-9:
            raise ConfigError(f"kernel rows must sum to 1, got sums {sums}")
        kernel = np.clip(kernel, 0.0, 1.0)
        kernel.flags.writeable = False
        object.__setattr__(self, "kernel", kernel)

    @classmethod
    def fully_informative(cls) -> "TaggingPolicy":
        """Tag equals the perceived state."""
        return cls(np.eye(2))

    @classmethod
    def uninformative(cls) -> "TaggingPolicy":
        return cls(np.full((2, 2), 0.5))

    def tag_given_perceived(self, tag: int, perceived: int) -> float:
        return float(self.kernel[perceived, tag])


@dataclass(frozen=True)
class PosteriorDistribution:
    """Finite distribution over beliefs, support ascending and deduplicated."""

    support: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        support = tuple(float(x) for x in self.support)
        weights = tuple(float(w) for w in self.weights)
        if len(support) != len(weights) or not support:
            raise ConfigError("support and weights must be non-empty and aligned")
        if any(not math.isfinite(x) or not 0.0 <= x <= 1.0 for x in support):
            raise ConfigError(f"support must lie in [0, 1], got {support}")
        if any(s2 - s1 <= 0.0 for s1, s2 in zip(support, support[1:])):
            raise ConfigError("support must be strictly increasing")
        if any(w < -1e-12 for w in weights):
            raise ConfigError(f"weights must be nonnegative, got {weights}")
        total = sum(weights)
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"weights must sum to 1, got {total!r}")
        weights = tuple(max(w, 0.0) for w in weights)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[float, float]],
        merge_tol: float = BELIEF_MERGE_TOL,
        drop_tol: float = 0.0,
    ) -> "PosteriorDistribution":
        """Build from (belief, weight) pairs, merging beliefs within merge_tol.

        Weights with absolute value at most ``drop_tol`` are dropped after
        merging; the remainder is renormalized only by the dropped mass.
        """
        merged: list[list[float]] = []
        for belief, weight in sorted(pairs):
            if merged and belief - merged[-1][0] <= merge_tol:
                total = merged[-1][1] + weight
                if total > 0.0:
                    merged[-1][0] = (
                        merged[-1][0] * merged[-1][1] + belief * weight
                    ) / total
                merged[-1][1] = total
            else:
                merged.append([float(belief), float(weight)])
        kept = [(b, w) for b, w in merged if abs(w) > drop_tol]
        if not kept:
            raise ConfigError("no support points left after merging")
        total = sum(w for _, w in kept)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"weights must sum to 1, got {total!r}")
        return cls(
            tuple(b for b, _ in kept), tuple(w / total for _, w in kept)
        )

    @classmethod
    def point(cls, belief: float) -> "PosteriorDistribution":
        return cls((float(belief),), (1.0,))

    def mean(self) -> float:
        return float(sum(b * w for b, w in zip(self.support, self.weights)))

    def expect(self, fn: Callable[[float], float]) -> float:
        return float(sum(fn(b) * w for b, w in zip(self.support, self.weights)))


class FeasibleInterval(NamedTuple):
    """Extreme posteriors and their fully-revealing tag weights."""

    low: float
    high: float
    weight_low: float
    weight_high: float


def feasible_interval(config: GameConfig | MisperceptionMatrix, effort: float) -> FeasibleInterval:
    """Range of beliefs any tagging policy can induce at the given effort.

    The endpoints are the posteriors of the tag-equals-perceived-state policy
    and every achievable belief lies between them. A tag whose marginal
    vanishes (only possible at effort 0 or 1 with a vanishing error rate)
    gets the prior mean as its belief, keeping the map total and monotone.
    """
    effort = _check_effort(effort)
    e0, e1 = config.eps0, config.eps1
    w_lo = (1.0 - effort) * (1.0 - e0) + effort * e1
    w_hi = (1.0 - effort) * e0 + effort * (1.0 - e1)
    low = effort * e1 / w_lo if w_lo > 0.0 else effort
    high = effort * (1.0 - e1) / w_hi if w_hi > 0.0 else effort
    return FeasibleInterval(low, high, w_lo, w_hi)


def _lifted_tag_probabilities(config: GameConfig | MisperceptionMatrix, policy: TaggingPolicy, tag: int) -> np.ndarray:
    # P(tag | true state) for each true state: d^T applied to pi(tag | .).
    if tag not in (0, 1):
        raise ConfigError(f"tag must be 0 or 1, got {tag!r}")
    e0, e1 = config.eps0, config.eps1
    d_t = np.array([[1.0 - e0, e0], [e1, 1.0 - e1]], float)
    return d_t @ policy.kernel[:, tag]


def posterior(
    config: GameConfig | MisperceptionMatrix,
    effort: float,
    policy: TaggingPolicy,
    tag: int,
) -> tuple[float, float]:
    """Belief and marginal probability of one tag under a policy.

    Raises NullSignalError when the tag is never sent.
    """
    effort = _check_effort(effort)
    lifted = _lifted_tag_probabilities(config, policy, tag)
    joint = lifted * prior_of(effort)
    marginal = float(joint.sum())
    if marginal == 0.0:
        raise NullSignalError(f"tag {tag} has zero marginal probability")
    return float(joint[1] / marginal), marginal


def policy_to_posteriors(
    config: GameConfig | MisperceptionMatrix,
    effort: float,
    policy: TaggingPolicy,
) -> PosteriorDistribution:
    """Distribution of beliefs induced by a policy, merging duplicate beliefs."""
    effort = _check_effort(effort)
    pairs = []
    for tag in (0, 1):
        try:
            belief, marginal = posterior(config, effort, policy, tag)
        except NullSignalError:
            continue
        pairs.append((belief, marginal))
    return PosteriorDistribution.from_pairs(pairs)


def posteriors_to_policy(
    config: GameConfig | MisperceptionMatrix,
    effort: float,
    tau: PosteriorDistribution,
) -> TaggingPolicy:
    """Tagging policy generating a two-point (or degenerate) belief distribution.

    Inverts the posterior map: each tag's column is
    ``weight * (d^T)^{-1} (belief_vec / prior)``. Requires effort strictly
    inside (0, 1), a mean matching the effort (plausibility), and support
    inside the feasible interval; otherwise the kernel would leave [0, 1].
    """
    effort = _check_effort(effort, open_interval=True)
    if len(tau.support) > 2:
        raise InfeasibleError(
            f"a binary tag carries at most two beliefs, got {len(tau.support)}"
        )
    if abs(tau.mean() - effort) > PLAUSIBILITY_TOL:
        raise NotPlausibleError(
            f"posterior mean {tau.mean()!r} does not match effort {effort!r}"
        )
    interval = feasible_interval(config, effort)
    for belief in tau.support:
        if belief < interval.low - 1e-9 or belief > interval.high + 1e-9:
            raise InfeasibleError(
                f"belief {belief!r} outside the feasible interval "
                f"[{interval.low!r}, {interval.high!r}]"
            )
    if len(tau.support) == 1:
        # Every tag must carry the prior mean; the uniform kernel is the
        # canonical choice among the uninformative policies.
        return TaggingPolicy.uninformative()

    e0, e1 = config.eps0, config.eps1
    d_t_inv = np.linalg.inv(np.array([[1.0 - e0, e0], [e1, 1.0 - e1]], float))
    theta = prior_of(effort)
    kernel = np.empty((2, 2), float)
    for tag, (belief, weight) in enumerate(zip(tau.support, tau.weights)):
        belief_vec = np.array([1.0 - belief, belief], float)
        kernel[:, tag] = weight * (d_t_inv @ (belief_vec / theta))
    if kernel.min() < -1e-9 or kernel.max() > 1.0 + 1e-9:
        raise InfeasibleError(
            f"no row-stochastic kernel reproduces these posteriors: {kernel}"
        )
    kernel = np.clip(kernel, 0.0, 1.0)
    sums = kernel.sum(axis=1, keepdims=True)
    if np.abs(sums - 1.0).max() > 1e-9:
        raise InfeasibleError(f"kernel rows sum to {sums.ravel()}, expected 1")
    return TaggingPolicy(kernel / sums)


def receiver_best_response(belief: float) -> float:
    """Comment positivity minimizing expected quadratic loss: the belief itself."""
    return _check_unit("belief", belief)


def receiver_utility(action: float, state: int) -> float:
    """Quadratic loss of commenting with positivity ``action`` in ``state``."""
    if state not in (0, 1):
        raise ConfigError(f"state must be 0 or 1, got {state!r}")
    return -((float(action) - state) ** 2)


def agent_belief_payoff(belief: float) -> float:
    """Producer payoff per impression at a user belief."""
    return _check_unit("belief", belief)


def sender_belief_value(belief: float) -> float:
    """Platform value of a user belief (positivity weighted by authenticity)."""
    belief = _check_unit("belief", belief)
    return belief * belief
