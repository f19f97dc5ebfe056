"""Equilibrium verification for finite tagging games in matrix form.

A finite game is a prior over P states, a row-stochastic P x P detection
matrix, and two K x P payoff tables (receiver and sender) over a discrete
action set. A candidate equilibrium is the triple (signaling kernel Pi,
action policy A, belief matrix U); the verifier checks the three defining
conditions separately:

- consistency: U matches the Bayes posteriors of Pi on every sent signal,
- receiver optimality: each signal's action maximizes expected receiver
  payoff under that signal's belief column,
- sender optimality: no deterministic signaling deviation improves the
  sender's value once the receiver re-interprets and best-responds to the
  deviation (the sender moves first and is committed, so beliefs follow).

Equilibrium *search* is out of scope (it is NP-hard in general); only
candidate triples are checked, and deviations are enumerated exhaustively
with a size guard. A response-locked diagnostic gap - the best deviation
value when the receiver's policy is frozen - is also reported; it admits a
row-argmax shortcut because the frozen objective is linear in the kernel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .errors import ConfigError, NullSignalError
from .game import GameConfig, TaggingPolicy

__all__ = [
    "FiniteGame",
    "StrategyTriple",
    "PBEReport",
    "posterior_matrix",
    "best_response_actions",
    "receiver_br_satisfied",
    "sender_value",
    "sender_opt_satisfied",
    "sender_response_locked_gap",
    "deterministic_kernels",
    "is_pbe",
    "binary_to_finite",
    "load_game",
]

#: Largest deviation enumeration allowed (columns ** rows).
MAX_ENUMERATION = 4096


def _read_only(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


def _check_rows_stochastic(name: str, mat: np.ndarray) -> None:
    if mat.min() < -1e-12 or mat.max() > 1.0 + 1e-12:
        raise ConfigError(f"{name} entries must lie in [0, 1]")
    sums = mat.sum(axis=1)
    if np.abs(sums - 1.0).max() > 1e-9:
        raise ConfigError(f"{name} rows must sum to 1, got {sums}")


@dataclass(frozen=True)
class FiniteGame:
    """Prior, detection matrix, and payoff tables of a finite tagging game."""

    theta: np.ndarray
    dmat: np.ndarray
    rmat: np.ndarray
    smat: np.ndarray

    def __post_init__(self) -> None:
        theta = np.array(self.theta, dtype=float).ravel()
        dmat = np.array(self.dmat, dtype=float)
        rmat = np.array(self.rmat, dtype=float)
        smat = np.array(self.smat, dtype=float)
        states = theta.size
        if states < 1 or theta.min() < -1e-12 or abs(theta.sum() - 1.0) > 1e-9:
            raise ConfigError(f"theta must be a probability vector, got {theta}")
        if dmat.shape != (states, states):
            raise ConfigError(
                f"dmat must be {states}x{states}, got shape {dmat.shape}"
            )
        _check_rows_stochastic("dmat", dmat)
        for name, mat in (("rmat", rmat), ("smat", smat)):
            if mat.ndim != 2 or mat.shape[1] != states:
                raise ConfigError(
                    f"{name} must have one column per state, got shape {mat.shape}"
                )
            if not np.all(np.isfinite(mat)):
                raise ConfigError(f"{name} entries must be finite")
        if rmat.shape[0] != smat.shape[0]:
            raise ConfigError("rmat and smat must share the action set")
        object.__setattr__(self, "theta", _read_only(np.clip(theta, 0.0, None)))
        object.__setattr__(self, "dmat", _read_only(dmat))
        object.__setattr__(self, "rmat", _read_only(rmat))
        object.__setattr__(self, "smat", _read_only(smat))

    @property
    def n_states(self) -> int:
        return self.theta.size

    @property
    def n_actions(self) -> int:
        return self.rmat.shape[0]


@dataclass(frozen=True)
class StrategyTriple:
    """Signaling kernel, action policy, and belief matrix of one candidate."""

    pimat: np.ndarray
    amat: np.ndarray
    umat: np.ndarray

    def __post_init__(self) -> None:
        pimat = np.array(self.pimat, dtype=float)
        amat = np.array(self.amat, dtype=float)
        umat = np.array(self.umat, dtype=float)
        if pimat.ndim != 2 or amat.ndim != 2 or umat.ndim != 2:
            raise ConfigError("pimat, amat, umat must all be matrices")
        _check_rows_stochastic("pimat", pimat)
        _check_rows_stochastic("amat", amat)
        if amat.shape[0] != pimat.shape[1]:
            raise ConfigError("amat needs one row per signal of pimat")
        if umat.shape != (pimat.shape[0], pimat.shape[1]):
            raise ConfigError(
                f"umat must be states x signals {pimat.shape}, got {umat.shape}"
            )
        if umat.min() < -1e-12 or umat.max() > 1.0 + 1e-12:
            raise ConfigError("umat entries must lie in [0, 1]")
        if np.abs(umat.sum(axis=0) - 1.0).max() > 1e-9:
            raise ConfigError("umat columns must each sum to 1")
        object.__setattr__(self, "pimat", _read_only(pimat))
        object.__setattr__(self, "amat", _read_only(amat))
        object.__setattr__(self, "umat", _read_only(umat))

    @property
    def n_signals(self) -> int:
        return self.pimat.shape[1]


def _signal_joint(game: FiniteGame, pimat: np.ndarray) -> np.ndarray:
    # Entry (m, n): probability of state m and signal n.
    return (game.theta[:, None] * game.dmat) @ pimat


def posterior_matrix(game: FiniteGame, pimat: np.ndarray) -> np.ndarray:
    """Column-stochastic Bayes posteriors, one column per signal.

    Raises NullSignalError when any signal is never sent; beliefs for such
    signals are not pinned down by Bayes' rule.
    """
    joint = _signal_joint(game, np.asarray(pimat, dtype=float))
    marginals = joint.sum(axis=0)
    dead = np.flatnonzero(marginals <= 0.0)
    if dead.size:
        raise NullSignalError(
            f"signals {dead.tolist()} are sent with probability zero"
        )
    return joint / marginals


def _posteriors_on_sent(
    game: FiniteGame, pimat: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    # Unsent signals default to the prior belief; they carry no probability,
    # so the choice cannot affect any value computation.
    joint = _signal_joint(game, pimat)
    marginals = joint.sum(axis=0)
    sent = marginals > 0.0
    umat = np.tile(game.theta[:, None], (1, pimat.shape[1]))
    if sent.any():
        umat[:, sent] = joint[:, sent] / marginals[sent]
    return umat, sent


def best_response_actions(game: FiniteGame, umat: np.ndarray) -> np.ndarray:
    """Deterministic action policy maximizing receiver payoff per signal.

    Ties go to the lowest action index.
    """
    scores = game.rmat @ np.asarray(umat, dtype=float)
    picks = np.argmax(scores, axis=0)
    amat = np.zeros((umat.shape[1], game.n_actions))
    amat[np.arange(umat.shape[1]), picks] = 1.0
    return amat


def receiver_br_satisfied(
    game: FiniteGame, triple: StrategyTriple, tol: float = 1e-12
) -> tuple[bool, float]:
    """Check per-signal action optimality under the triple's own beliefs.

    Comparing against the best deterministic action per signal suffices:
    the receiver's objective is linear in each row of the action policy.
    """
    scores = game.rmat @ triple.umat
    achieved = np.einsum("nk,kn->n", triple.amat, scores)
    worst = float(np.max(scores.max(axis=0) - achieved))
    worst = max(worst, 0.0)
    return worst <= tol, worst


def sender_value(game: FiniteGame, pimat: np.ndarray, amat: np.ndarray) -> float:
    """Expected sender payoff of a kernel/action pair."""
    joint = _signal_joint(game, np.asarray(pimat, dtype=float))
    return float(np.sum(joint * (np.asarray(amat, dtype=float) @ game.smat).T))


def deterministic_kernels(rows: int, cols: int):
    """Yield every row-deterministic stochastic matrix of the given shape."""
    if cols**rows > MAX_ENUMERATION:
        raise ConfigError(
            f"deviation enumeration {cols}**{rows} exceeds {MAX_ENUMERATION}"
        )
    for assignment in product(range(cols), repeat=rows):
        kernel = np.zeros((rows, cols))
        kernel[np.arange(rows), assignment] = 1.0
        yield kernel


def sender_opt_satisfied(
    game: FiniteGame, triple: StrategyTriple, tol: float = 1e-9
) -> tuple[bool, float]:
    """Check the committed sender against every deterministic deviation.

    Each deviation is evaluated under its own Bayes posteriors and the
    receiver's best response to them, since the receiver observes the
    committed kernel before acting. Mixed deviations cannot beat the best
    deterministic one: the re-interpreted value of a mixture is attained
    by splitting signals, and with the receiver re-optimizing per signal
    the best split is itself deterministic.
    """
    current = sender_value(game, triple.pimat, triple.amat)
    best = current
    for kernel in deterministic_kernels(game.n_states, triple.n_signals):
        umat, _ = _posteriors_on_sent(game, kernel)
        deviation = sender_value(game, kernel, best_response_actions(game, umat))
        if deviation > best:
            best = deviation
    gap = max(best - current, 0.0)
    return gap <= tol, gap


def sender_response_locked_gap(game: FiniteGame, triple: StrategyTriple) -> float:
    """Best deviation improvement with the receiver's responses frozen.

    With the action policy held fixed, the sender's value is linear in the
    kernel, so the best deviation takes a row-wise argmax of the
    coefficient matrix. Reported as a diagnostic: a committed sender can
    be optimal while this frozen-response gap is positive.
    """
    response = (triple.amat @ game.smat).T
    coeff = (game.theta[:, None] * game.dmat).T @ response
    best = float(coeff.max(axis=1).sum())
    current = float(np.sum(triple.pimat * coeff))
    return max(best - current, 0.0)


@dataclass(frozen=True)
class PBEReport:
    """Outcome of the three equilibrium checks on one candidate triple."""

    consistent: bool
    consistency_residual: float
    unsent_signals: tuple[int, ...]
    receiver_ok: bool
    receiver_gap: float
    sender_ok: bool
    sender_gap: float
    locked_gap: float

    @property
    def passed(self) -> bool:
        return self.consistent and self.receiver_ok and self.sender_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "consistency": {
                "ok": self.consistent,
                "residual": self.consistency_residual,
                "unsent_signals": list(self.unsent_signals),
            },
            "receiver": {"ok": self.receiver_ok, "gap": self.receiver_gap},
            "sender": {
                "ok": self.sender_ok,
                "gap": self.sender_gap,
                "response_locked_gap": self.locked_gap,
            },
        }


def is_pbe(
    game: FiniteGame,
    triple: StrategyTriple,
    consistency_tol: float = 1e-10,
    receiver_tol: float = 1e-12,
    sender_tol: float = 1e-9,
) -> PBEReport:
    """Run all three equilibrium checks; failures are reported, not raised."""
    derived, sent = _posteriors_on_sent(game, triple.pimat)
    if sent.any():
        residual = float(np.abs(triple.umat[:, sent] - derived[:, sent]).max())
    else:
        residual = 0.0
    receiver_ok, receiver_gap = receiver_br_satisfied(game, triple, receiver_tol)
    sender_ok, sender_gap = sender_opt_satisfied(game, triple, sender_tol)
    return PBEReport(
        consistent=residual <= consistency_tol,
        consistency_residual=residual,
        unsent_signals=tuple(int(i) for i in np.flatnonzero(~sent)),
        receiver_ok=receiver_ok,
        receiver_gap=receiver_gap,
        sender_ok=sender_ok,
        sender_gap=sender_gap,
        locked_gap=sender_response_locked_gap(game, triple),
    )


def binary_to_finite(
    config: GameConfig,
    effort: float,
    policy: TaggingPolicy | None = None,
    n_actions: int = 11,
) -> tuple[FiniteGame, StrategyTriple]:
    """Express the binary game at a fixed effort as a finite matrix game.

    Actions discretize [0, 1] uniformly; the receiver's table is the
    quadratic loss and the sender's is action times authenticity, whose
    expectation under consistent beliefs and best responses equals the
    squared-belief value.
    """
    if not 0.0 < float(effort) < 1.0:
        raise ConfigError(f"effort must lie strictly inside (0, 1), got {effort!r}")
    if n_actions < 2:
        raise ConfigError(f"need at least two actions, got {n_actions}")
    if policy is None:
        policy = TaggingPolicy.fully_informative()
    actions = np.linspace(0.0, 1.0, n_actions)
    states = np.array([0.0, 1.0])
    game = FiniteGame(
        theta=np.array([1.0 - effort, effort]),
        dmat=np.array(
            [[1.0 - config.eps0, config.eps0], [config.eps1, 1.0 - config.eps1]]
        ),
        rmat=-((actions[:, None] - states[None, :]) ** 2),
        smat=actions[:, None] * states[None, :],
    )
    umat = posterior_matrix(game, policy.kernel)
    triple = StrategyTriple(
        pimat=policy.kernel,
        amat=best_response_actions(game, umat),
        umat=umat,
    )
    return game, triple


def load_game(source) -> tuple[FiniteGame, StrategyTriple | None]:
    """Read a game (and optional candidate triple) from JSON.

    The document carries row-major arrays under "theta", "d", "r", "s",
    and optionally "pi", "a", "u"; a missing "u" is derived from "pi" by
    Bayes' rule.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read game document: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ConfigError(f"game document must be an object, got {type(doc).__name__}")
    missing = [key for key in ("theta", "d", "r", "s") if key not in doc]
    if missing:
        raise ConfigError(f"game document missing keys: {missing}")
    game = FiniteGame(
        theta=np.array(doc["theta"], dtype=float),
        dmat=np.array(doc["d"], dtype=float),
        rmat=np.array(doc["r"], dtype=float),
        smat=np.array(doc["s"], dtype=float),
    )
    if "pi" not in doc:
        return game, None
    pimat = np.array(doc["pi"], dtype=float)
    if "u" in doc:
        umat = np.array(doc["u"], dtype=float)
    else:
        umat, _ = _posteriors_on_sent(game, pimat)
    if "a" in doc:
        amat = np.array(doc["a"], dtype=float)
    else:
        amat = best_response_actions(game, umat)
    return game, StrategyTriple(pimat=pimat, amat=amat, umat=umat)
