"""Shared fixtures: benchmark configurations and kernel warm-up."""

from __future__ import annotations

import warnings

import pytest

from nudgesim import (
    CascadeConfig,
    CommentFactors,
    GameConfig,
    integrate_ode,
    set_backend,
    simulate,
)
from nudgesim._kernels import HAS_NUMBA

# The four bundled detector/cost configurations, keyed by scenario case name.
CASE_CONFIGS = {
    "case1": GameConfig(eps0=0.05, eps1=0.05, k=0.6),
    "case2": GameConfig(eps0=0.15, eps1=0.20, k=0.6),
    "case3": GameConfig(eps0=0.05, eps1=0.05, k=1.0),
    "case4": GameConfig(eps0=0.15, eps1=0.20, k=1.0),
}

# Effort caps for CASE_CONFIGS, frozen from a high-precision bisection of
# 2*k*lam = D*(high(lam) - low(lam)) done with 40-digit arithmetic.
CASE_LAMBDA_BAR = {
    "case1": 0.660568209519623,
    "case2": 0.3381098076495992,
    "case3": 0.40194544205163374,
    "case4": 0.13773368016580873,
}


@pytest.fixture(scope="session")
def case_configs() -> dict[str, GameConfig]:
    return dict(CASE_CONFIGS)


@pytest.fixture(scope="session")
def case_lambda_bar() -> dict[str, float]:
    return dict(CASE_LAMBDA_BAR)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile the hot kernels once so timed tests measure work, not JIT."""
    if HAS_NUMBA:
        set_backend("numba")
        try:
            config = CascadeConfig(n0=1, p0=1, friend_mean=4.0, share_prob=0.5, steps=4)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                simulate(config, CommentFactors(0.5, 0.5), seed=0)
            integrate_ode(2.0, 1.0, CommentFactors(0.5, 0.5), 2.0, horizon=0.1)
        finally:
            set_backend(None)
    yield


@pytest.fixture(autouse=True)
def _reset_backend():
    """Keep backend overrides from leaking between tests."""
    yield
    set_backend(None)
