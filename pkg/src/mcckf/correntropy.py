"""Gaussian-kernel correntropy machinery.

The measurement-update inflation scalar is the ratio of two Gaussian kernels:
one of the innovation in the ``R``-inverse weighted norm, one of the predicted
residual in the prior-covariance-inverse weighted norm.  Under the standard
one-iterate prediction the residual is identically zero, so the denominator
kernel equals one; the general form is implemented regardless.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigurationError, KernelDomainError, WeightingError

__all__ = [
    "KernelPolicy",
    "LambdaInputs",
    "gaussian_kernel",
    "resolve_sigma",
    "weighted_norm_sq",
    "lambda_from_norms",
    "lambda_factor",
    "DEFAULT_LAMBDA_MIN",
]

# Floor keeping the inflation scalar positive when the kernel underflows to
# exact zero on large outliers; settable to 0 to disable.
DEFAULT_LAMBDA_MIN = 1e-12


@dataclass
class KernelPolicy:
    """Kernel-size selection strategy.

    ``fixed`` uses ``sigma`` as-is.  ``adaptive`` sets the kernel size to the
    weighted innovation norm, floored at ``sigma_floor`` (an artifact
    convention: the adaptive selection rule is pluggable, not canonical).
    """

    mode: str = "fixed"
    sigma: float = 1.0
    sigma_floor: float = 1e-6


@dataclass
class LambdaInputs:
    """Raw ingredients of the inflation scalar.

    ``innovation_cov`` and ``prior_cov`` are the covariances whose inverses
    weight the innovation and predicted-residual norms.
    """

    innovation: np.ndarray
    innovation_cov: np.ndarray
    predicted_residual: np.ndarray
    prior_cov: np.ndarray


def gaussian_kernel(arg_sq, sigma):
    """Evaluate ``exp(-arg_sq / (2 sigma^2))`` for a nonnegative squared norm.

    Equals 1 iff ``arg_sq == 0``.  A negative argument signals an indefinite
    weight matrix upstream and raises :class:`KernelDomainError`.
    """
    if sigma <= 0.0:
        raise ConfigurationError(f"kernel size must be positive, got {sigma}")
    if arg_sq < 0.0:
        raise KernelDomainError(f"negative squared norm {arg_sq} passed to the kernel")
    return math.exp(-arg_sq / (2.0 * sigma * sigma))


def resolve_sigma(policy, innovation_norm=0.0):
    """Resolve the kernel size for one step under ``policy``."""
    if policy.mode == "fixed":
        if policy.sigma <= 0.0:
            raise ConfigurationError(f"kernel sigma must be positive, got {policy.sigma}")
        return float(policy.sigma)
    if policy.mode == "adaptive":
        if policy.sigma_floor <= 0.0:
            raise ConfigurationError(
                f"kernel sigma_floor must be positive, got {policy.sigma_floor}"
            )
        return max(float(policy.sigma_floor), float(innovation_norm))
    raise ConfigurationError(f"unknown kernel mode {policy.mode!r}")


def weighted_norm_sq(vec, weight):
    """Squared norm of ``vec`` weighted by ``inv(weight)``, via Cholesky solve.

    Raises :class:`WeightingError` when ``weight`` is not positive definite.
    """
    vec = np.asarray(vec, dtype=float)
    try:
        chol_lower = np.linalg.cholesky(np.asarray(weight, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise WeightingError("weight matrix is not positive definite") from exc
    z = solve_triangular(chol_lower, vec, lower=True, check_finite=False)
    return float(z @ z)


def lambda_from_norms(num_arg_sq, den_arg_sq, policy, lambda_min=DEFAULT_LAMBDA_MIN):
    """Inflation scalar from the two weighted squared norms.

    Evaluates the kernel ratio as a single exponential (algebraically
    identical, immune to 0/0 underflow) and floors the result at
    ``lambda_min``.
    """
    if num_arg_sq < 0.0 or den_arg_sq < 0.0:
        raise KernelDomainError("weighted squared norms must be nonnegative")
    sigma = resolve_sigma(policy, math.sqrt(num_arg_sq))
    try:
        lam = math.exp(-(num_arg_sq - den_arg_sq) / (2.0 * sigma * sigma))
    except OverflowError:
        lam = math.inf
    return max(lam, lambda_min)


def lambda_factor(inputs, policy, lambda_min=DEFAULT_LAMBDA_MIN):
    """Inflation scalar from raw innovation/residual inputs.

    Both weighted norms are evaluated through Cholesky solves of the weight
    matrices; no explicit inversion.
    """
    num = weighted_norm_sq(inputs.innovation, inputs.innovation_cov)
    den = weighted_norm_sq(inputs.predicted_residual, inputs.prior_cov)
    return lambda_from_norms(num, den, policy, lambda_min)
