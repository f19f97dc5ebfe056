"""Command-line entry points.

Exit codes: 0 on success, 1 on a verification failure (a failed
certificate or a rejected equilibrium candidate), 2 on configuration or
usage errors. The NUDGESIM_SEED environment variable overrides the base
seed from any source; NUDGESIM_BACKEND (auto, numba, numpy) picks the
kernel implementation, and --backend overrides it for one invocation.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import replace

import click

from .backend import set_backend
from .errors import ConfigError, NudgesimError
from .finite_pbe import is_pbe, load_game
from .harness import (
    SUITE_NAMES,
    builtin_suite,
    load_scenarios,
    run_suite,
    verify_certificates,
)


def _fail_config(message: str) -> "NoReturn":  # noqa: F821 - doc only
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _gather_scenarios(suite: str | None, config_path: str | None):
    if (suite is None) == (config_path is None):
        _fail_config("provide exactly one of --suite or --config")
    try:
        scenarios = builtin_suite(suite) if suite else load_scenarios(config_path)
    except ConfigError as exc:
        _fail_config(str(exc))
    return scenarios


def _apply_overrides(scenarios, seed: int | None, reps: int | None):
    env_seed = os.environ.get("NUDGESIM_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            _fail_config(f"NUDGESIM_SEED must be an integer, got {env_seed!r}")
    updated = []
    for scenario in scenarios:
        if seed is not None:
            scenario = replace(scenario, seed=seed)
        if reps is not None:
            scenario = replace(scenario, replications=reps)
        updated.append(scenario)
    return updated


def _select_backend(backend: str | None) -> None:
    if backend is not None:
        try:
            set_backend(backend)
        except ConfigError as exc:
            _fail_config(str(exc))


@click.group()
def main() -> None:
    """Tagging-policy equilibria and comment-cascade simulations."""


@main.command()
@click.option("--suite", type=click.Choice(SUITE_NAMES), default=None,
              help="Built-in scenario suite.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with a scenarios array.")
@click.option("--seed", type=int, default=None, help="Base seed override.")
@click.option("--reps", type=int, default=None, help="Replication count override.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out",
              show_default=True, help="Output directory.")
@click.option("--backend", type=click.Choice(["auto", "numba", "numpy"]),
              default=None, help="Kernel implementation override.")
def run(suite, config_path, seed, reps, out_dir, backend):
    """Run scenarios and write per-scenario trajectories and summaries."""
    _select_backend(backend)
    scenarios = _apply_overrides(_gather_scenarios(suite, config_path), seed, reps)
    try:
        results = run_suite(scenarios, out_dir)
    except NudgesimError as exc:
        _fail_config(str(exc))
    header = f"{'scenario':<18} {'k':>5} {'eps0':>5} {'eps1':>5} " \
             f"{'lambda_bar':>10} {'chosen':>7} {'value':>8}"
    click.echo(header)
    for result in results:
        chosen = result.summary["chosen_lambda"]
        click.echo(
            f"{result.scenario:<18} {result.summary['k']:>5.2f} "
            f"{result.summary['eps0']:>5.2f} {result.summary['eps1']:>5.2f} "
            f"{result.lambda_bar:>10.4f} "
            f"{('-' if chosen is None else format(chosen, '.2f')):>7} "
            f"{result.sender_value:>8.4f}"
        )
    if results:
        click.echo(f"wrote {len(results)} scenario director{'y' if len(results) == 1 else 'ies'} under {out_dir}")


@main.command()
@click.option("--suite", type=click.Choice(SUITE_NAMES), default=None,
              help="Built-in scenario suite.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with a scenarios array.")
def verify(suite, config_path):
    """Fit and re-check optimality certificates for each scenario."""
    scenarios = _gather_scenarios(suite, config_path)
    report = verify_certificates(scenarios)
    for row in report["scenarios"]:
        if "error" in row:
            click.echo(f"{row['scenario']}: ERROR {row['error']}")
            continue
        status = "ok" if row["ok"] else "FAIL"
        click.echo(
            f"{row['scenario']}: {status} lambda_bar={row['lambda_bar']:.6f} "
            f"psi={row['psi']:.3e} recheck_violation={row['recheck_violation']:.3e}"
        )
    if not report["ok"]:
        sys.exit(1)


@main.command("pbe-check")
@click.option("--game", "game_path", type=click.Path(), required=True,
              help="JSON document with the game matrices and candidate triple.")
def pbe_check(game_path):
    """Verify a candidate equilibrium triple from a JSON document."""
    try:
        game, triple = load_game(game_path)
    except NudgesimError as exc:
        _fail_config(str(exc))
    if triple is None:
        _fail_config('document carries no candidate triple (missing "pi")')
    report = is_pbe(game, triple)
    click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    if not report.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()
