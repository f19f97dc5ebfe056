"""Backend selection and compiled/interpreted kernel equivalence."""

from __future__ import annotations

import numpy as np
import pytest

from nudgesim import (
    CascadeConfig,
    CommentFactors,
    ConfigError,
    active_backend,
    integrate_ode,
    set_backend,
    simulate,
)
from nudgesim import _kernels, backend


class TestSelection:
    def test_default_follows_numba_availability(self, monkeypatch):
        monkeypatch.delenv("NUDGESIM_BACKEND", raising=False)
        expected = "numba" if _kernels.HAS_NUMBA else "numpy"
        assert active_backend() == expected

    def test_override_wins(self):
        set_backend("numpy")
        assert active_backend() == "numpy"
        set_backend(None)

    def test_environment_variable_controls_default(self, monkeypatch):
        monkeypatch.setenv("NUDGESIM_BACKEND", "numpy")
        set_backend(None)
        assert active_backend() == "numpy"

    def test_invalid_override_rejected(self):
        with pytest.raises(ConfigError):
            set_backend("fortran")

    def test_invalid_environment_value_rejected(self, monkeypatch):
        monkeypatch.setenv("NUDGESIM_BACKEND", "cuda")
        with pytest.raises(ConfigError):
            active_backend()

    def test_numba_request_fails_without_numba(self, monkeypatch):
        monkeypatch.setattr(_kernels, "HAS_NUMBA", False)
        set_backend("numba")
        with pytest.raises(ConfigError):
            active_backend()

    def test_auto_degrades_without_numba(self, monkeypatch):
        monkeypatch.setattr(_kernels, "HAS_NUMBA", False)
        monkeypatch.delenv("NUDGESIM_BACKEND", raising=False)
        assert active_backend() == "numpy"

    def test_kernel_dispatch_targets_active_backend(self):
        set_backend("numpy")
        assert backend.kernel("cascade_counts") is _kernels.cascade_counts_numpy
        assert backend.kernel("rk4_integrate") is _kernels.rk4_integrate_numpy


needs_numba = pytest.mark.skipif(
    not _kernels.HAS_NUMBA, reason="numba is not importable"
)


@needs_numba
class TestEquivalence:
    CONFIG = CascadeConfig(n0=50, p0=50, friend_mean=50.0, share_prob=0.5, steps=500)

    def test_cascades_are_bit_identical(self):
        factors = CommentFactors.from_belief(0.9)
        runs = {}
        for name in ("numba", "numpy"):
            set_backend(name)
            runs[name] = simulate(self.CONFIG, factors, seed=12345)
        for attr in ("n", "p", "z", "eta", "zbar", "nbar"):
            assert np.array_equal(
                getattr(runs["numba"], attr), getattr(runs["numpy"], attr)
            ), attr
        assert runs["numba"].extinct_at == runs["numpy"].extinct_at

    def test_poisson_cascades_are_bit_identical(self):
        config = CascadeConfig(
            n0=20, p0=20, friend_mean=12.0, share_prob=0.4, steps=300,
            friend_model="poisson", comment_mode="per_offspring",
        )
        factors = CommentFactors(0.3, 0.6)
        runs = {}
        for name in ("numba", "numpy"):
            set_backend(name)
            runs[name] = simulate(config, factors, seed=777)
        assert np.array_equal(runs["numba"].z, runs["numpy"].z)
        assert np.array_equal(runs["numba"].n, runs["numpy"].n)

    def test_integrator_agrees_across_backends(self):
        factors = CommentFactors(0.5, 0.2)
        results = {}
        for name in ("numba", "numpy"):
            set_backend(name)
            results[name] = integrate_ode(100.0, 50.0, factors, 25.0)
        assert results["numba"][0] == pytest.approx(results["numpy"][0], abs=1e-12)
        assert results["numba"][1] == pytest.approx(results["numpy"][1], abs=1e-12)
