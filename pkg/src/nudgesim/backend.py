"""Backend selection for the compiled simulation kernels.

The NUDGESIM_BACKEND environment variable picks the implementation:

- ``auto`` (default): compiled kernels when numba imports, else interpreted
- ``numba``: compiled kernels, error if numba is unavailable
- ``numpy``: interpreted kernels, always available

Both backends draw from the random stream identically, so switching
backends never changes any simulated number.
"""

from __future__ import annotations

import os

from . import _kernels
from .errors import ConfigError

__all__ = ["active_backend", "set_backend", "kernel"]

_VALID = ("auto", "numba", "numpy")

#: Process-level override taking precedence over the environment variable.
_override: str | None = None


def set_backend(name: str | None) -> None:
    """Force a backend for this process; None restores environment control."""
    if name is not None and name not in _VALID:
        raise ConfigError(f"backend must be one of {_VALID}, got {name!r}")
    global _override
    _override = name


def active_backend() -> str:
    """Resolve the backend in force: 'numba' or 'numpy'."""
    requested = _override if _override is not None else os.environ.get(
        "NUDGESIM_BACKEND", "auto"
    )
    if requested not in _VALID:
        raise ConfigError(
            f"NUDGESIM_BACKEND must be one of {_VALID}, got {requested!r}"
        )
    if requested == "numba" and not _kernels.HAS_NUMBA:
        raise ConfigError("numba backend requested but numba is not importable")
    if requested == "auto":
        return "numba" if _kernels.HAS_NUMBA else "numpy"
    return requested


def kernel(name: str):
    """Fetch the active implementation of a kernel by base name."""
    return getattr(_kernels, f"{name}_{active_backend()}")
