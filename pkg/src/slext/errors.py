"""Exception hierarchy shared by all slext modules."""

from __future__ import annotations


class SlextError(Exception):
    """Base class for every error raised by slext."""

    #: process exit status used by the command-line front end
    exit_code = 2


class ValidationError(SlextError, ValueError):
    """Malformed input rejected before any computation starts."""


class DomainError(ValidationError):
    """A point lies outside the interior of the relevant interval or table."""


class UsageError(ValidationError):
    """Objects combined in a way the operation does not allow."""


class InvalidRequestError(ValidationError):
    """The request is well formed but meaningless for the given operator."""


class UnsupportedConfigurationError(ValidationError):
    """The configuration lies outside what the solvers support."""


class IntegrationError(SlextError):
    """The initial-value integration produced non-finite values."""

    exit_code = 3


class ConvergenceError(SlextError):
    """An iterative procedure failed to converge."""

    exit_code = 3


class IntegrabilityError(SlextError):
    """A quadrature toward a singular endpoint does not converge."""

    exit_code = 3


class DegenerateFrameError(SlextError):
    """The two solutions of a frame are (numerically) linearly dependent."""

    exit_code = 3


class TrivialSolutionError(SlextError):
    """A solution expected to be nontrivial vanishes within tolerance."""

    exit_code = 3


class ClassificationError(SlextError):
    """Numerical limit-point / limit-circle evidence is inconclusive.

    The ``diagnostics`` attribute carries the window data that was examined.
    """

    exit_code = 3

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
