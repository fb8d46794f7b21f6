"""Input validation helpers for matrices, vectors and covariance inputs."""

import numpy as np

from .errors import ConfigurationError

SYMMETRY_RTOL = 1e-10
PSD_RTOL = 1e-10


def as_matrix(a, name, shape=None):
    """Coerce ``a`` to a 2-D float array, optionally enforcing a shape."""
    m = np.atleast_2d(np.asarray(a, dtype=float))
    if m.ndim != 2:
        raise ConfigurationError(f"{name} must be a matrix, got ndim={m.ndim}")
    if shape is not None and m.shape != shape:
        raise ConfigurationError(f"{name} must have shape {shape}, got {m.shape}")
    return m


def as_vector(a, name, size=None):
    """Coerce ``a`` to a 1-D float array, optionally enforcing a length."""
    v = np.atleast_1d(np.asarray(a, dtype=float))
    if v.ndim != 1:
        raise ConfigurationError(f"{name} must be a vector, got ndim={v.ndim}")
    if size is not None and v.shape != (size,):
        raise ConfigurationError(f"{name} must have length {size}, got {v.shape[0]}")
    return v


def check_square(a, name):
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ConfigurationError(f"{name} must be square, got shape {m.shape}")
    return m


def check_symmetric(a, name, rtol=SYMMETRY_RTOL):
    m = check_square(a, name)
    scale = 1.0 + np.abs(m).max(initial=0.0)
    if np.abs(m - m.T).max(initial=0.0) > rtol * scale:
        raise ConfigurationError(f"{name} must be symmetric")
    return m


def check_psd(a, name, rtol=PSD_RTOL):
    """Validate that ``a`` is symmetric positive semi-definite."""
    m = check_symmetric(a, name)
    eigvals = np.linalg.eigvalsh(m)
    scale = 1.0 + np.abs(eigvals).max(initial=0.0)
    if eigvals.min(initial=0.0) < -rtol * scale:
        raise ConfigurationError(f"{name} must be positive semi-definite")
    return m


def is_positive_definite(a):
    try:
        np.linalg.cholesky(np.asarray(a, dtype=float))
    except np.linalg.LinAlgError:
        return False
    return True
