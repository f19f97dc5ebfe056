"""Reproducible experiment harness binding the model modules together.

A scenario names a detector/cost configuration, optionally a held effort
below the cap, and the cascade setup used to simulate comment trends. Two
built-in suites cover the benchmark grid: ``table1`` runs the four
configurations under the revealing policy at the effort cap, ``table2``
holds each configuration at two interior efforts under the garbled
three-point policy.

For every tag (support belief) of the selected policy the harness derives
belief-driven comment factors, runs seeded cascade replications, and
writes one trajectory CSV plus one summary JSON per scenario. All random
streams descend from ``SeedSequence([seed, crc32(name), tag_index])``, so
outputs are byte-identical across runs, platforms, and backends.
"""

from __future__ import annotations

import csv
import json
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .backend import active_backend
from .branching import (
    CascadeConfig,
    CommentFactors,
    simulate_many,
    terminal_statistics,
    trend_from_belief,
)
from .equilibrium import (
    LagrangianCertificate,
    fit_lagrangian,
    hybrid_distribution,
    max_implementable_effort,
    sender_value_of,
    verify_certificate,
)
from .errors import ConfigError, NoPositiveEffortError
from .game import GameConfig, PosteriorDistribution, TaggingPolicy, policy_to_posteriors

__all__ = [
    "Scenario",
    "RunResult",
    "builtin_suite",
    "load_scenarios",
    "run_scenario",
    "run_suite",
    "verify_certificates",
    "SUITE_NAMES",
]

DEFAULT_SEED = 7
DEFAULT_REPLICATIONS = 200

#: (name, k, eps0, eps1) of the four benchmark detector/cost settings.
_BASE_CASES = (
    ("case1", 0.6, 0.05, 0.05),
    ("case2", 0.6, 0.15, 0.20),
    ("case3", 1.0, 0.05, 0.05),
    ("case4", 1.0, 0.15, 0.20),
)

#: Held efforts per base case for the garbled-policy suite.
_HELD_EFFORTS = {
    "case1": (0.65, 0.40),
    "case2": (0.33, 0.10),
    "case3": (0.39, 0.20),
    "case4": (0.13, 0.07),
}

SUITE_NAMES = ("table1", "table2")


@dataclass(frozen=True)
class Scenario:
    """One reproducible experiment: a game, an optional held effort, a cascade."""

    name: str
    game: GameConfig
    chosen_lambda: float | None = None
    cascade: CascadeConfig = field(default_factory=CascadeConfig)
    replications: int = DEFAULT_REPLICATIONS
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if not self.name or not isinstance(self.name, str):
            raise ConfigError(f"scenario name must be a non-empty string, got {self.name!r}")
        if self.replications < 1:
            raise ConfigError(f"replications must be positive, got {self.replications}")
        if self.chosen_lambda is not None:
            chosen = float(self.chosen_lambda)
            if not 0.0 < chosen < 1.0:
                raise ConfigError(
                    f"chosen_lambda must lie strictly inside (0, 1), got {chosen!r}"
                )
            bound = max_implementable_effort(self.game)
            if chosen > bound.value + 1e-12:
                raise ConfigError(
                    f"scenario {self.name!r}: chosen_lambda {chosen!r} exceeds "
                    f"the implementable cap {bound.value!r}"
                )
            object.__setattr__(self, "chosen_lambda", chosen)


def builtin_suite(suite: str) -> list[Scenario]:
    """Scenarios of a registered suite."""
    if suite == "table1":
        return [
            Scenario(name=f"table1-{name}", game=GameConfig(eps0, eps1, k))
            for name, k, eps0, eps1 in _BASE_CASES
        ]
    if suite == "table2":
        scenarios = []
        for name, k, eps0, eps1 in _BASE_CASES:
            for idx, held in enumerate(_HELD_EFFORTS[name], start=1):
                scenarios.append(
                    Scenario(
                        name=f"table2-{name}.{idx}",
                        game=GameConfig(eps0, eps1, k),
                        chosen_lambda=held,
                    )
                )
        return scenarios
    raise ConfigError(f"unknown suite {suite!r}; registered suites: {SUITE_NAMES}")


_CASCADE_KEYS = {
    "n0", "p0", "friend_mean", "share_prob", "steps", "friend_model", "comment_mode",
}


def _scenario_from_dict(entry: dict) -> Scenario:
    if not isinstance(entry, dict):
        raise ConfigError(f"each scenario must be an object, got {type(entry).__name__}")
    unknown = set(entry) - {
        "name", "k", "eps0", "eps1", "chosen_lambda", "cascade", "replications", "seed",
    }
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    missing = [key for key in ("name", "k", "eps0", "eps1") if key not in entry]
    if missing:
        raise ConfigError(f"scenario missing keys: {missing}")
    cascade_entry = entry.get("cascade", {})
    if not isinstance(cascade_entry, dict):
        raise ConfigError("cascade must be an object of cascade settings")
    unknown = set(cascade_entry) - _CASCADE_KEYS
    if unknown:
        raise ConfigError(f"unknown cascade keys: {sorted(unknown)}")
    return Scenario(
        name=entry["name"],
        game=GameConfig(entry["eps0"], entry["eps1"], entry["k"]),
        chosen_lambda=entry.get("chosen_lambda"),
        cascade=CascadeConfig(**cascade_entry),
        replications=entry.get("replications", DEFAULT_REPLICATIONS),
        seed=entry.get("seed", DEFAULT_SEED),
    )


def load_scenarios(path) -> list[Scenario]:
    """Read a scenario list from a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict) or "scenarios" not in doc:
        raise ConfigError('config must be an object with a "scenarios" array')
    if not isinstance(doc["scenarios"], list):
        raise ConfigError('"scenarios" must be an array')
    return [_scenario_from_dict(entry) for entry in doc["scenarios"]]


def _tag_labels(tau: PosteriorDistribution) -> list[str]:
    if len(tau.support) == 2:
        return ["sig0", "sig1"]
    if len(tau.support) == 3:
        return ["sig0", "mid", "sig1"]
    return [f"tag{i}" for i in range(len(tau.support))]


def _json_float(value: float) -> float | None:
    value = float(value)
    return value if math.isfinite(value) else None


@dataclass(frozen=True)
class RunResult:
    """Everything one scenario produced, with output paths when written."""

    scenario: str
    lambda_bar: float
    effort: float
    sender_value: float
    certificate: LagrangianCertificate
    tags: dict
    mixture: dict
    backend: str
    summary: dict
    csv_path: Path | None = None
    summary_path: Path | None = None


def run_scenario(scenario: Scenario, out_dir=None) -> RunResult:
    """Simulate one scenario; write its CSV and JSON when out_dir is given."""
    game = scenario.game
    bound = max_implementable_effort(game)
    if bound.no_positive_effort:
        raise NoPositiveEffortError(
            f"scenario {scenario.name!r}: no positive effort is implementable"
        )
    if scenario.chosen_lambda is not None:
        if scenario.chosen_lambda > bound.value + 1e-12:
            raise ConfigError(
                f"scenario {scenario.name!r}: chosen_lambda exceeds the cap"
            )
        effort = scenario.chosen_lambda
        tau = hybrid_distribution(game, effort)
    else:
        effort = bound.value
        tau = policy_to_posteriors(game, effort, TaggingPolicy.fully_informative())
    certificate = fit_lagrangian(game, effort, tau, 1000)

    labels = _tag_labels(tau)
    name_hash = zlib.crc32(scenario.name.encode("utf-8"))
    tag_results: dict[str, dict] = {}
    csv_rows: list[tuple] = []
    simulated_mixture = 0.0
    for tag_index, (label, belief, weight) in enumerate(
        zip(labels, tau.support, tau.weights)
    ):
        factors = CommentFactors.from_belief(belief)
        seed_seq = np.random.SeedSequence([scenario.seed, name_hash, tag_index])
        trajectories = simulate_many(
            scenario.cascade, factors, scenario.replications, seed_seq
        )
        stats = terminal_statistics(trajectories)
        tag_results[label] = {
            "belief": belief,
            "weight": weight,
            "analytic_trend": trend_from_belief(belief),
            "mean_eta": _json_float(stats["mean_eta"]),
            "std_eta": _json_float(stats["std_eta"]),
            "mean_zbar": _json_float(stats["mean_zbar"]),
            "mean_nbar": _json_float(stats["mean_nbar"]),
            "replications": stats["replications"],
            "surviving": stats["surviving"],
            "extinct": stats["extinct"],
        }
        simulated_mixture += weight * stats["mean_eta"]
        for rep_index, trajectory in enumerate(trajectories):
            rep_id = f"{label}-{rep_index:03d}"
            for event in range(1, trajectory.events + 1):
                csv_rows.append(
                    (
                        rep_id,
                        event,
                        int(trajectory.n[event]),
                        int(trajectory.p[event]),
                        int(trajectory.z[event]),
                        repr(float(trajectory.eta[event])),
                        repr(float(trajectory.zbar[event])),
                        repr(float(trajectory.nbar[event])),
                    )
                )

    mixture = {
        "analytic_trend": 1.0 - effort,
        "simulated_trend": _json_float(simulated_mixture),
    }
    summary = {
        "scenario": scenario.name,
        "k": game.k,
        "eps0": game.eps0,
        "eps1": game.eps1,
        "lambda_bar": bound.value,
        "chosen_lambda": scenario.chosen_lambda,
        "effort": effort,
        "support": list(tau.support),
        "weights": list(tau.weights),
        "sender_value": sender_value_of(tau),
        "certificate": {
            "psi": certificate.psi,
            "phi": certificate.phi,
            "rho": certificate.rho,
            "max_violation": certificate.max_violation,
            "support_residual": certificate.support_residual,
            "grid_size": certificate.grid_size,
        },
        "cascade": {
            "n0": scenario.cascade.n0,
            "p0": scenario.cascade.p0,
            "friend_mean": scenario.cascade.friend_mean,
            "share_prob": scenario.cascade.share_prob,
            "steps": scenario.cascade.steps,
            "friend_model": scenario.cascade.friend_model,
            "comment_mode": scenario.cascade.comment_mode,
        },
        "replications": scenario.replications,
        "seed": scenario.seed,
        "tags": tag_results,
        "mixture": mixture,
    }

    csv_path = None
    summary_path = None
    if out_dir is not None:
        scenario_dir = Path(out_dir) / scenario.name
        scenario_dir.mkdir(parents=True, exist_ok=True)
        csv_path = scenario_dir / "trajectories.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["replication_id", "i", "N", "P", "Z", "eta", "zbar", "nbar"]
            )
            writer.writerows(csv_rows)
        summary_path = scenario_dir / "summary.json"
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")

    return RunResult(
        scenario=scenario.name,
        lambda_bar=bound.value,
        effort=effort,
        sender_value=summary["sender_value"],
        certificate=certificate,
        tags=tag_results,
        mixture=mixture,
        backend=active_backend(),
        summary=summary,
        csv_path=csv_path,
        summary_path=summary_path,
    )


def run_suite(scenarios: Iterable[Scenario], out_dir=None) -> list[RunResult]:
    """Run scenarios in order; write a suite-level settings echo when out_dir given."""
    results = [run_scenario(scenario, out_dir) for scenario in scenarios]
    if out_dir is not None:
        rows = [
            {
                "scenario": result.scenario,
                "k": result.summary["k"],
                "eps0": result.summary["eps0"],
                "eps1": result.summary["eps1"],
                "lambda_bar": result.lambda_bar,
                "chosen_lambda": result.summary["chosen_lambda"],
                "effort": result.effort,
                "sender_value": result.sender_value,
            }
            for result in results
        ]
        path = Path(out_dir) / "suite_summary.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"scenarios": rows}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return results


def verify_certificates(
    scenarios: Iterable[Scenario],
    fit_grid: int = 1000,
    recheck_grid: int = 10000,
) -> dict:
    """Fit and re-verify each scenario's certificate at the effort cap.

    Failures and errors are collected per scenario instead of raised, so a
    bad scenario cannot mask the others.
    """
    rows = []
    for scenario in scenarios:
        row: dict = {"scenario": scenario.name}
        try:
            bound = max_implementable_effort(scenario.game)
            if bound.no_positive_effort:
                raise NoPositiveEffortError("no positive effort is implementable")
            cap = bound.value
            tau = policy_to_posteriors(
                scenario.game, cap, TaggingPolicy.fully_informative()
            )
            certificate = fit_lagrangian(scenario.game, cap, tau, fit_grid)
            max_violation, support_residual = verify_certificate(
                scenario.game, cap, tau,
                certificate.psi, certificate.phi, certificate.rho, recheck_grid,
            )
            row.update(
                lambda_bar=cap,
                chosen_lambda=scenario.chosen_lambda,
                psi=certificate.psi,
                phi=certificate.phi,
                rho=certificate.rho,
                fit_violation=certificate.max_violation,
                recheck_violation=max_violation,
                support_residual=support_residual,
                psi_ok=certificate.psi <= 1e-12,
                violation_ok=max_violation <= 1e-8,
                support_ok=support_residual <= 1e-9,
            )
            row["ok"] = bool(
                row["psi_ok"] and row["violation_ok"] and row["support_ok"]
            )
        except Exception as exc:
            row.update(error=f"{type(exc).__name__}: {exc}", ok=False)
        rows.append(row)
    return {"ok": all(row["ok"] for row in rows), "scenarios": rows}
