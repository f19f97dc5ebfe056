"""Exception hierarchy shared across the package."""

from __future__ import annotations


class NudgesimError(Exception):
    """Base class for all package errors."""


class ConfigError(NudgesimError, ValueError):
    """Inputs violate a constructor or loader contract."""


class InvalidEffortError(NudgesimError, ValueError):
    """Effort level outside the domain required by the operation."""


class NullSignalError(NudgesimError):
    """A tag was requested that is sent with probability zero."""


class NotPlausibleError(NudgesimError):
    """A posterior distribution whose mean does not equal the prior mean."""


class InfeasibleError(NudgesimError):
    """Posterior support or weights unreachable under the noise channel."""


class NotOptimalError(NudgesimError):
    """No supporting certificate exists for the candidate distribution."""


class NoPositiveEffortError(NudgesimError):
    """No strictly positive effort is implementable for this configuration."""


class ExtinctError(NudgesimError):
    """A cascade step was requested on a population that has died out."""


class DegenerateError(NudgesimError):
    """The stationary trend is undefined for these comment factors."""


class SubcriticalWarning(UserWarning):
    """Offspring mean at or below one: the cascade dies out almost surely."""
