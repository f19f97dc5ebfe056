"""Two-type comment cascade as a branching process with wake-up events.

A post reaches an initial pool of users, each labeled by the type of
comment they received (negative or positive). At every event one user
wakes, leaves the pool, posts a comment, and the sharing subset of their
friends joins the pool labeled by that comment. The waker's comment is
negative with probability ``alpha_nn`` when the waker held a negative
comment and ``alpha_pn`` otherwise; under belief-driven behavior both
equal one minus the tag-conditional belief.

Per-event normalized iterates Z_i/i and N_i/i follow a stochastic
approximation whose mean field is::

    dz/dt = (m - 1 - z) * 1{z > 0}
    dn/dt = (eta * (alpha_nn * m - 1) + (1 - eta) * alpha_pn * m - n) * 1{z > 0}

with ``eta = n / z`` and ``m`` the mean number of sharing friends. Its
attractor is ``z* = m - 1`` with negativity trend
``eta* = alpha_pn / (1 - alpha_nn + alpha_pn)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import backend
from .errors import ConfigError, DegenerateError, ExtinctError, SubcriticalWarning

__all__ = [
    "CascadeConfig",
    "CommentFactors",
    "BranchingState",
    "Trajectory",
    "sample_offspring",
    "step",
    "simulate",
    "simulate_many",
    "terminal_statistics",
    "ode_rhs",
    "integrate_ode",
    "stationary_trend",
    "stationary_point",
    "trend_from_belief",
]

FRIEND_MODELS = ("constant", "poisson")
COMMENT_MODES = ("batch", "per_offspring")


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class CascadeConfig:
    """Initial pools, sharing behavior, and the event budget of one cascade."""

    n0: int = 50
    p0: int = 50
    friend_mean: float = 50.0
    share_prob: float = 0.5
    steps: int = 500
    friend_model: str = "constant"
    comment_mode: str = "batch"

    def __post_init__(self) -> None:
        for name in ("n0", "p0", "steps"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.n0 < 0 or self.p0 < 0:
            raise ConfigError(f"pool sizes must be nonnegative, got {self.n0}, {self.p0}")
        if self.n0 + self.p0 < 1:
            raise ConfigError("the initial pool must contain at least one user")
        if self.steps < 1:
            raise ConfigError(f"steps must be positive, got {self.steps}")
        if not math.isfinite(self.friend_mean) or self.friend_mean < 0.0:
            raise ConfigError(f"friend_mean must be nonnegative, got {self.friend_mean!r}")
        _check_prob("share_prob", self.share_prob)
        if self.friend_model not in FRIEND_MODELS:
            raise ConfigError(
                f"friend_model must be one of {FRIEND_MODELS}, got {self.friend_model!r}"
            )
        if self.comment_mode not in COMMENT_MODES:
            raise ConfigError(
                f"comment_mode must be one of {COMMENT_MODES}, got {self.comment_mode!r}"
            )
        if self.friend_model == "constant" and abs(
            self.friend_mean - round(self.friend_mean)
        ) > 1e-9:
            raise ConfigError(
                f"constant friend model needs an integer count, got {self.friend_mean!r}"
            )
        if self.offspring_mean <= 1.0:
            warnings.warn(
                f"mean offspring {self.offspring_mean} <= 1: the cascade is "
                "subcritical and will die out",
                SubcriticalWarning,
                stacklevel=2,
            )

    @property
    def offspring_mean(self) -> float:
        return self.friend_mean * self.share_prob


@dataclass(frozen=True)
class CommentFactors:
    """Probabilities that a waker's comment is negative, by the waker's type."""

    alpha_nn: float
    alpha_pn: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha_nn", _check_prob("alpha_nn", self.alpha_nn))
        object.__setattr__(self, "alpha_pn", _check_prob("alpha_pn", self.alpha_pn))

    @classmethod
    def from_belief(cls, belief: float) -> "CommentFactors":
        """Belief-driven commenting: negativity is disbelief, for both types."""
        belief = _check_prob("belief", belief)
        return cls(1.0 - belief, 1.0 - belief)

    @property
    def denominator(self) -> float:
        return 1.0 - self.alpha_nn + self.alpha_pn


@dataclass(frozen=True)
class BranchingState:
    """Counts after event i, with the normalized iterates as views."""

    n: int
    p: int
    i: int = 0

    def __post_init__(self) -> None:
        if self.n < 0 or self.p < 0 or self.i < 0:
            raise ConfigError(f"counts must be nonnegative, got {self}")

    @property
    def z(self) -> int:
        return self.n + self.p

    @property
    def eta(self) -> float:
        return self.n / self.z if self.z > 0 else math.nan

    @property
    def zbar(self) -> float:
        return self.z / self.i if self.i > 0 else float(self.z)

    @property
    def nbar(self) -> float:
        return self.n / self.i if self.i > 0 else float(self.n)


def sample_offspring(rng, config: CascadeConfig) -> int:
    """Number of friends who reshare at one wake-up event.

    Consumes uniforms in the same order as the simulation kernel: the
    friend count first (Poisson model only), then one coin per friend.
    """
    if config.friend_model == "poisson":
        limit = math.exp(-config.friend_mean)
        prod = rng.random()
        friends = 0
        while prod > limit:
            friends += 1
            prod *= rng.random()
    else:
        friends = int(round(config.friend_mean))
    sharers = 0
    for _ in range(friends):
        if rng.random() < config.share_prob:
            sharers += 1
    return sharers


def step(
    state: BranchingState,
    rng,
    factors: CommentFactors,
    config: CascadeConfig,
) -> BranchingState:
    """Advance one wake-up event; the population must still be alive."""
    z = state.z
    if z <= 0:
        raise ExtinctError(f"no user left to wake at event {state.i}")
    wakes_negative = rng.random() * z < state.n
    sharers = sample_offspring(rng, config)
    alpha = factors.alpha_nn if wakes_negative else factors.alpha_pn
    if config.comment_mode == "per_offspring":
        negative_joiners = 0
        for _ in range(sharers):
            if rng.random() < alpha:
                negative_joiners += 1
    else:
        negative_joiners = sharers if rng.random() < alpha else 0
    n = state.n - (1 if wakes_negative else 0) + negative_joiners
    p = state.p - (0 if wakes_negative else 1) + sharers - negative_joiners
    return BranchingState(n=n, p=p, i=state.i + 1)


@dataclass(frozen=True)
class Trajectory:
    """Per-event counts and normalized iterates of one simulated cascade.

    Arrays are indexed by event number 0..steps. After extinction the
    counts freeze, ``eta`` carries the last defined value forward, and
    ``extinct_at`` records the fatal event index.
    """

    n: np.ndarray
    p: np.ndarray
    z: np.ndarray
    eta: np.ndarray
    zbar: np.ndarray
    nbar: np.ndarray
    extinct_at: int | None = field(default=None)

    @property
    def extinct(self) -> bool:
        return self.extinct_at is not None

    @property
    def events(self) -> int:
        return len(self.z) - 1

    @property
    def terminal(self) -> BranchingState:
        return BranchingState(int(self.n[-1]), int(self.p[-1]), self.events)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def simulate(config: CascadeConfig, factors: CommentFactors, seed=None) -> Trajectory:
    """Run one cascade to the event budget or extinction."""
    rng = _as_rng(seed)
    steps = config.steps
    out_n = np.empty(steps + 1, np.int64)
    out_p = np.empty(steps + 1, np.int64)
    out_z = np.empty(steps + 1, np.int64)
    run = backend.kernel("cascade_counts")
    extinct = run(
        rng,
        config.n0,
        config.p0,
        steps,
        config.friend_model == "poisson",
        float(config.friend_mean),
        int(round(config.friend_mean)),
        float(config.share_prob),
        float(factors.alpha_nn),
        float(factors.alpha_pn),
        config.comment_mode == "per_offspring",
        out_n,
        out_p,
        out_z,
    )
    alive = out_z > 0
    eta = np.divide(
        out_n, out_z, out=np.full(steps + 1, np.nan), where=alive
    )
    extinct_at = int(extinct) if extinct >= 0 else None
    if extinct_at is not None:
        eta[extinct_at:] = eta[extinct_at - 1]
    index = np.arange(1, steps + 1, dtype=np.float64)
    zbar = np.empty(steps + 1, np.float64)
    nbar = np.empty(steps + 1, np.float64)
    zbar[0] = out_z[0]
    nbar[0] = out_n[0]
    zbar[1:] = out_z[1:] / index
    nbar[1:] = out_n[1:] / index
    return Trajectory(
        n=out_n, p=out_p, z=out_z, eta=eta, zbar=zbar, nbar=nbar,
        extinct_at=extinct_at,
    )


def simulate_many(
    config: CascadeConfig,
    factors: CommentFactors,
    replications: int,
    seed,
) -> list[Trajectory]:
    """Independent replications from spawned child seeds, in a fixed order."""
    if replications < 1:
        raise ConfigError(f"replications must be positive, got {replications}")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [
        simulate(config, factors, np.random.default_rng(child))
        for child in root.spawn(replications)
    ]


def terminal_statistics(trajectories: Sequence[Trajectory]) -> dict:
    """Cross-replication summary of terminal iterates, extinct runs excluded."""
    surviving = [t for t in trajectories if not t.extinct]
    stats = {
        "replications": len(trajectories),
        "surviving": len(surviving),
        "extinct": len(trajectories) - len(surviving),
    }
    if surviving:
        eta = np.array([t.eta[-1] for t in surviving])
        zbar = np.array([t.zbar[-1] for t in surviving])
        nbar = np.array([t.nbar[-1] for t in surviving])
        stats.update(
            mean_eta=float(eta.mean()),
            std_eta=float(eta.std(ddof=1)) if len(eta) > 1 else 0.0,
            mean_zbar=float(zbar.mean()),
            mean_nbar=float(nbar.mean()),
        )
    else:
        stats.update(
            mean_eta=math.nan, std_eta=math.nan,
            mean_zbar=math.nan, mean_nbar=math.nan,
        )
    return stats


def ode_rhs(
    z: float, n: float, factors: CommentFactors, mean_offspring: float
) -> tuple[float, float]:
    """Mean-field drift; identically zero once the population is gone."""
    from ._kernels import ode_field

    return ode_field(
        float(z), float(n), factors.alpha_nn, factors.alpha_pn, float(mean_offspring)
    )


def integrate_ode(
    z0: float,
    n0: float,
    factors: CommentFactors,
    mean_offspring: float,
    horizon: float = 50.0,
    step_size: float = 0.01,
) -> tuple[float, float]:
    """Integrate the mean field with the classical fourth-order scheme."""
    if not z0 > 0.0:
        raise ConfigError(f"z0 must be positive, got {z0!r}")
    if not step_size > 0.0 or not horizon > 0.0:
        raise ConfigError("horizon and step_size must be positive")
    run = backend.kernel("rk4_integrate")
    z, n = run(
        float(z0), float(n0), factors.alpha_nn, factors.alpha_pn,
        float(mean_offspring), float(horizon), float(step_size),
    )
    if not (math.isfinite(z) and math.isfinite(n)):
        raise FloatingPointError(f"integration diverged: z={z!r}, n={n!r}")
    return z, n


def stationary_trend(factors: CommentFactors) -> float:
    """Long-run fraction of negative comments implied by the factors."""
    denom = factors.denominator
    if denom <= 0.0:
        raise DegenerateError(
            "no stationary trend: negative comments regenerate exactly "
            f"as fast as they wake (denominator {denom!r})"
        )
    return factors.alpha_pn / denom


def stationary_point(
    factors: CommentFactors, mean_offspring: float
) -> tuple[float, float]:
    """Attractor (z*, n*) of the mean field."""
    z_star = mean_offspring - 1.0
    return z_star, stationary_trend(factors) * z_star


def trend_from_belief(belief: float) -> float:
    """Stationary negativity under belief-driven commenting."""
    return 1.0 - _check_prob("belief", belief)
