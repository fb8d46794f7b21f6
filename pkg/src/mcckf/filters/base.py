"""Shared estimator machinery for the filter variants.

Every variant exposes the same two-phase interface: ``time_update`` advances
the posterior state to a prior, ``measurement_update`` folds in one
measurement and returns the new posterior plus step diagnostics.  ``step``
composes the two and ``run`` processes a whole measurement sequence.

Estimators follow scikit-learn conventions: hyperparameters are stored
verbatim by ``__init__`` and exposed through ``get_params``/``set_params``,
and validation happens when filtering starts.  Numerical breakdown never
raises out of a step; it sets the divergence flag and freezes the state.
"""

import inspect
import math
from dataclasses import dataclass, replace

import numpy as np

from ..correntropy import (
    DEFAULT_LAMBDA_MIN,
    KernelPolicy,
    lambda_from_norms,
)
from ..errors import ConfigurationError, NumericalBreakdownError

__all__ = [
    "StepMatrices",
    "FullCovariance",
    "FilterState",
    "StepDiagnostics",
    "FilterRun",
    "KalmanStepFilter",
]

_DEFAULT_KERNEL = KernelPolicy()


@dataclass
class StepMatrices:
    """Model matrices for one transition/measurement instant."""

    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    q: np.ndarray
    r: np.ndarray

    @classmethod
    def from_model(cls, model):
        return cls(model.f, model.g, model.h, model.q_cov, model.r_cov)


@dataclass
class FullCovariance:
    """Plain full-matrix covariance representation."""

    matrix: np.ndarray

    def reconstruct(self):
        return self.matrix

    @property
    def is_finite(self):
        return bool(np.isfinite(self.matrix).all())


@dataclass
class FilterState:
    """State estimate plus covariance in the owning variant's representation.

    ``predicted_residual`` is populated on prior-phase states: it is the
    difference between the carried prediction and a recomputation of it,
    which the standard recursion makes exactly zero.
    """

    x_hat: np.ndarray
    cov: object
    phase: str = "posterior"
    diverged: bool = False
    predicted_residual: np.ndarray = None

    def covariance(self):
        """Reconstructed full error covariance."""
        return self.cov.reconstruct()


@dataclass
class StepDiagnostics:
    lambda_k: float
    gain: np.ndarray
    innovation: np.ndarray
    re_factor_present: bool = False
    diverged: bool = False


@dataclass
class FilterRun:
    """Batch filtering output; rows after a divergence stay NaN."""

    x_filtered: np.ndarray   # (n_steps, n) posterior estimates
    lambdas: np.ndarray      # (n_steps,) per-step inflation scalars
    diverged: bool
    diverged_at: int         # step index of the divergence, or None
    steps_completed: int
    p_diag: np.ndarray = None        # trace mode: posterior covariance diagonal
    innovations: np.ndarray = None   # trace mode: per-step innovations


class KalmanStepFilter:
    """Base class for the filter estimators.

    Parameters
    ----------
    model : StateSpaceModel
        System matrices, noise covariances and initial moments.
    kernel : KernelPolicy, optional
        Kernel-size policy for the inflation scalar; default fixed size 1.
    lambda_min : float
        Floor applied to the inflation scalar (0 disables the floor).
    """

    variant = None
    produces_re_factor = False

    def __init__(self, model=None, kernel=None, lambda_min=DEFAULT_LAMBDA_MIN):
        self.model = model
        self.kernel = kernel
        self.lambda_min = lambda_min

    # -- scikit-learn parameter protocol -------------------------------------

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return sorted(name for name in sig.parameters if name != "self")

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = self._param_names()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(
                    f"invalid parameter {key!r} for {type(self).__name__}; "
                    f"valid parameters are {valid}"
                )
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"

    # -- lifecycle ------------------------------------------------------------

    def initial_state(self):
        """Validate the model and return the initial posterior state.

        The initial covariance is factorized by the variant's own
        decomposition.  May raise a factorization error for noise matrices
        the variant cannot handle (``run`` converts that into a divergence).
        """
        if self.model is None:
            raise ConfigurationError(f"{type(self).__name__} requires a model")
        self._default_mats = StepMatrices.from_model(self.model)
        self._default_noise = self._noise_terms(self._default_mats)
        return FilterState(
            x_hat=self.model.x0_mean.copy(),
            cov=self._init_cov(self.model.pi0),
            phase="posterior",
        )

    def time_update(self, state, matrices=None):
        """Propagate a posterior state through the dynamics."""
        if state.diverged:
            return state
        if state.phase != "posterior":
            raise ValueError("time_update requires a posterior-phase state")
        mats = self._resolve_matrices(matrices)
        noise = self._resolve_noise(mats, matrices)
        try:
            with np.errstate(all="ignore"):
                x_pred, cov_pred = self._predict(state, mats, noise)
                residual = x_pred - mats.f @ state.x_hat
        except (NumericalBreakdownError, np.linalg.LinAlgError):
            return replace(state, diverged=True)
        diverged = not (np.isfinite(x_pred).all() and cov_pred.is_finite)
        return FilterState(x_pred, cov_pred, "prior", diverged, residual)

    def measurement_update(self, state, y, matrices=None):
        """Fold one measurement into a prior state."""
        if state.diverged:
            return state, self._diverged_diag()
        if state.phase != "prior":
            raise ValueError("measurement_update requires a prior-phase state")
        mats = self._resolve_matrices(matrices)
        noise = self._resolve_noise(mats, matrices)
        y = np.asarray(y, dtype=float).reshape(-1)
        try:
            with np.errstate(all="ignore"):
                innovation = y - mats.h @ state.x_hat
                lam = self._compute_lambda(innovation, state, mats, noise)
                x_new, cov_new, gain = self._measurement(
                    state, innovation, lam, mats, noise
                )
        except (NumericalBreakdownError, np.linalg.LinAlgError):
            return replace(state, phase="posterior", diverged=True), self._diverged_diag()
        diverged = not (
            math.isfinite(lam)
            and np.isfinite(x_new).all()
            and np.isfinite(gain).all()
            and cov_new.is_finite
        )
        new_state = FilterState(x_new, cov_new, "posterior", diverged)
        diag = StepDiagnostics(lam, gain, innovation, self.produces_re_factor, diverged)
        return new_state, diag

    def step(self, state, y, matrices=None):
        """One full filtering instant: time update then measurement update."""
        state = self.time_update(state, matrices)
        return self.measurement_update(state, y, matrices)

    def run(self, measurements, trace=False):
        """Filter a measurement sequence from the initial state.

        Numerical breakdown freezes the trial: remaining rows stay NaN and
        the run is flagged diverged.  With ``trace=True`` the per-step
        covariance diagonal and innovations are recorded as well.
        """
        y = np.asarray(measurements, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        n_steps = y.shape[0]
        try:
            state = self.initial_state()
        except (NumericalBreakdownError, np.linalg.LinAlgError):
            n = self.model.n_states
            return FilterRun(
                x_filtered=np.full((n_steps, n), np.nan),
                lambdas=np.full(n_steps, np.nan),
                diverged=True,
                diverged_at=0,
                steps_completed=0,
                p_diag=np.full((n_steps, n), np.nan) if trace else None,
                innovations=np.full_like(y, np.nan) if trace else None,
            )
        n = state.x_hat.size
        x = np.full((n_steps, n), np.nan)
        lams = np.full(n_steps, np.nan)
        p_diag = np.full((n_steps, n), np.nan) if trace else None
        innovations = np.full_like(y, np.nan) if trace else None
        diverged_at = None
        for k in range(n_steps):
            state = self.time_update(state)
            state, diag = self.measurement_update(state, y[k])
            if trace and diag.innovation is not None:
                innovations[k] = diag.innovation
            if state.diverged or diag.diverged:
                diverged_at = k
                break
            x[k] = state.x_hat
            lams[k] = diag.lambda_k
            if trace:
                p_diag[k] = np.diagonal(state.covariance())
        return FilterRun(
            x_filtered=x,
            lambdas=lams,
            diverged=diverged_at is not None,
            diverged_at=diverged_at,
            steps_completed=n_steps if diverged_at is None else diverged_at,
            p_diag=p_diag,
            innovations=innovations,
        )

    # -- hooks for subclasses ---------------------------------------------------

    def _init_cov(self, pi0):
        raise NotImplementedError

    def _noise_terms(self, mats):
        """Variant-specific factorization of the noise covariances."""
        return None

    def _predict(self, state, mats, noise):
        raise NotImplementedError

    def _lambda_norms(self, innovation, state, mats, noise):
        """Weighted squared norms (innovation, predicted residual)."""
        raise NotImplementedError

    def _measurement(self, state, innovation, lam, mats, noise):
        raise NotImplementedError

    # -- internals ---------------------------------------------------------------

    def _compute_lambda(self, innovation, state, mats, noise):
        kernel = self.kernel if self.kernel is not None else _DEFAULT_KERNEL
        num_sq, den_sq = self._lambda_norms(innovation, state, mats, noise)
        return lambda_from_norms(num_sq, den_sq, kernel, self.lambda_min)

    def _resolve_matrices(self, matrices):
        if matrices is not None:
            return matrices
        if getattr(self, "_default_mats", None) is None:
            raise ConfigurationError("call initial_state() before stepping")
        return self._default_mats

    def _resolve_noise(self, mats, matrices):
        if matrices is None:
            return self._default_noise
        return self._noise_terms(mats)

    def _diverged_diag(self):
        return StepDiagnostics(math.nan, None, None, self.produces_re_factor, True)
