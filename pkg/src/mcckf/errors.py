"""Exception types shared across the package.

``NumericalBreakdownError`` and its subclasses signal recoverable numerical
failures: the filters translate them into a divergence flag instead of
aborting a Monte-Carlo run.  The remaining exceptions indicate misuse
(invalid configuration or insufficient data) and always propagate.
"""


class NumericalBreakdownError(ValueError):
    """A numerical operation failed in a way a filter treats as divergence."""


class InvalidWeightError(NumericalBreakdownError):
    """A weighted orthogonalization received a nonpositive or tiny weight."""


class DecompositionError(NumericalBreakdownError):
    """A matrix factorization failed (e.g. a nonpositive pivot)."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SingularFactorError(NumericalBreakdownError):
    """A triangular solve hit an exactly zero diagonal entry."""


class WeightingError(NumericalBreakdownError):
    """A weight matrix for a quadratic-form norm is not positive definite."""


class KernelDomainError(NumericalBreakdownError):
    """The kernel received a negative squared norm (indefinite weight upstream)."""


class ConfigurationError(ValueError):
    """Invalid model, noise, kernel or experiment configuration."""


class InsufficientDataError(ValueError):
    """Too few samples for the requested statistic."""


class EmptyResultError(RuntimeError):
    """An experiment produced no usable trials."""
