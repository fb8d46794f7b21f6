"""Linear discrete-time stochastic models and trajectory simulation.

Models follow::

    x[k] = F x[k-1] + G w[k-1],    w ~ N(0, Q)  (+ optional shot noise)
    y[k] = H x[k]  + v[k],         v ~ N(0, R)  (+ optional shot noise)

Shot noise corrupts a configured fraction of time instants with impulses of
integer magnitude, mimicking sparse outliers.  Simulation also returns the
sample covariances of the realized noise sequences, which the benchmark
protocols feed to the filters in place of the exact covariances.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, InsufficientDataError
from .validation import as_matrix, as_vector, check_psd

__all__ = [
    "StateSpaceModel",
    "ShotNoiseConfig",
    "TrialRecord",
    "simulate",
    "sample_covariance",
    "example1_model",
    "example2_model",
]


@dataclass
class StateSpaceModel:
    """System matrices, noise covariances and initial moments.

    Covariances are validated as symmetric positive semi-definite.  Filters
    that require strictly positive definite noise will surface that at
    initialization or as a divergence flag.
    """

    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    q_cov: np.ndarray
    r_cov: np.ndarray
    x0_mean: np.ndarray
    pi0: np.ndarray

    def __post_init__(self):
        self.f = as_matrix(self.f, "f")
        n = self.f.shape[0]
        if self.f.shape != (n, n):
            raise ConfigurationError(f"f must be square, got {self.f.shape}")
        self.g = as_matrix(self.g, "g")
        if self.g.shape[0] != n:
            raise ConfigurationError(f"g must have {n} rows, got {self.g.shape}")
        q = self.g.shape[1]
        self.h = as_matrix(self.h, "h")
        if self.h.shape[1] != n:
            raise ConfigurationError(f"h must have {n} columns, got {self.h.shape}")
        m = self.h.shape[0]
        self.q_cov = check_psd(as_matrix(self.q_cov, "q_cov", (q, q)), "q_cov")
        self.r_cov = check_psd(as_matrix(self.r_cov, "r_cov", (m, m)), "r_cov")
        self.x0_mean = as_vector(self.x0_mean, "x0_mean", n)
        self.pi0 = check_psd(as_matrix(self.pi0, "pi0", (n, n)), "pi0")

    @property
    def n_states(self):
        return self.f.shape[0]

    @property
    def n_measurements(self):
        return self.h.shape[0]

    @property
    def n_noise(self):
        return self.g.shape[1]

    def with_noise(self, q_cov=None, r_cov=None):
        """Copy of the model with replaced noise covariances."""
        return replace(
            self,
            q_cov=self.q_cov if q_cov is None else q_cov,
            r_cov=self.r_cov if r_cov is None else r_cov,
        )


@dataclass
class ShotNoiseConfig:
    """Sparse impulsive corruption of the noise sequences.

    A ``fraction_corrupted`` share of time instants, drawn without
    replacement from ``[protected_prefix + 1, n_steps - protected_suffix]``,
    receives an additive impulse.  Each impulse magnitude is an integer drawn
    uniformly from ``[magnitude_low, magnitude_high]`` and is added to every
    component of the corrupted noise vector.  Corrupted instants are drawn
    independently for the process and measurement sequences.
    """

    enabled: bool = True
    fraction_corrupted: float = 0.10
    protected_prefix: int = 10
    protected_suffix: int = 1
    magnitude_low: int = 0
    magnitude_high: int = 3

    def __post_init__(self):
        if not 0.0 <= self.fraction_corrupted <= 1.0:
            raise ConfigurationError(
                f"fraction_corrupted must lie in [0, 1], got {self.fraction_corrupted}"
            )
        if self.protected_prefix < 0 or self.protected_suffix < 0:
            raise ConfigurationError("protected window sizes must be nonnegative")
        if self.magnitude_high < self.magnitude_low:
            raise ConfigurationError("magnitude_high must be >= magnitude_low")


@dataclass
class TrialRecord:
    """One simulated trajectory plus realized-noise sample covariances."""

    truth: np.ndarray          # (n_steps, n) states x[1..N]
    measurements: np.ndarray   # (n_steps, m) measurements y[1..N]
    q_hat: np.ndarray          # sample covariance of the realized process noise
    r_hat: np.ndarray          # sample covariance of the realized measurement noise
    seed: object
    x0: np.ndarray = None      # realized initial state
    w_shot_instants: np.ndarray = field(default=None, repr=False)
    v_shot_instants: np.ndarray = field(default=None, repr=False)


def sample_covariance(samples):
    """Unbiased sample covariance (divisor N-1) about the sample mean.

    Accepts an (N, k) array or a sequence of N vectors; returns an exactly
    symmetric k x k matrix.  Raises :class:`InsufficientDataError` for fewer
    than two samples.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"samples must be a 2-D array, got ndim={x.ndim}")
    if x.shape[0] < 2:
        raise InsufficientDataError("sample covariance needs at least 2 samples")
    c = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    return (c + c.T) / 2.0


def simulate(model, n_steps, shot=None, seed=0):
    """Simulate ``n_steps`` of the model, deterministic given ``seed``.

    ``seed`` may be an int or a tuple of ints (e.g. ``(master_seed, trial)``),
    fed to :class:`numpy.random.SeedSequence` so trials are reproducible and
    order-independent.  Returns a :class:`TrialRecord`; the sample covariances
    are computed from the realized (shot-corrupted) noise sequences.
    """
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be >= 1, got {n_steps}")
    n, m, q = model.n_states, model.n_measurements, model.n_noise
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    x0 = model.x0_mean + _psd_factor(model.pi0) @ rng.standard_normal(n)
    w = rng.standard_normal((n_steps, q)) @ _psd_factor(model.q_cov).T
    v = rng.standard_normal((n_steps, m)) @ _psd_factor(model.r_cov).T

    w_instants = v_instants = np.empty(0, dtype=int)
    if shot is not None and shot.enabled:
        w_instants = _corrupt(w, shot, n_steps, rng)
        v_instants = _corrupt(v, shot, n_steps, rng)

    truth = np.empty((n_steps, n))
    measurements = np.empty((n_steps, m))
    x = x0
    for k in range(n_steps):
        x = model.f @ x + model.g @ w[k]
        truth[k] = x
        measurements[k] = model.h @ x + v[k]

    return TrialRecord(
        truth=truth,
        measurements=measurements,
        q_hat=sample_covariance(w),
        r_hat=sample_covariance(v),
        seed=seed,
        x0=x0,
        w_shot_instants=w_instants,
        v_shot_instants=v_instants,
    )


def _corrupt(noise, shot, n_steps, rng):
    """Add impulses to ``noise`` in place; returns the corrupted time instants.

    Row ``k-1`` of the noise array corresponds to time instant ``k``.
    """
    count = int(round(shot.fraction_corrupted * n_steps))
    if count == 0:
        return np.empty(0, dtype=int)
    lo = shot.protected_prefix + 1
    hi = n_steps - shot.protected_suffix
    if lo > hi or count > hi - lo + 1:
        raise ConfigurationError(
            f"cannot place {count} distinct corrupted instants in [{lo}, {hi}]"
        )
    instants = np.sort(rng.choice(np.arange(lo, hi + 1), size=count, replace=False))
    magnitudes = rng.integers(shot.magnitude_low, shot.magnitude_high + 1, size=count)
    noise[instants - 1] += magnitudes[:, None].astype(float)
    return instants


def example1_model(dt=0.1):
    """Kinematic displacement/velocity/acceleration tracking model.

    Position is observed directly; the process noise covariance is the
    polynomial-in-``dt`` matrix of the integrated kinematic chain.
    """
    f = np.array([[1.0, dt, dt**2 / 2.0], [0.0, 1.0, dt], [0.0, 0.0, 1.0]])
    q = np.array(
        [
            [dt**5 / 20.0, dt**4 / 8.0, dt**3 / 6.0],
            [dt**4 / 8.0, dt**3 / 3.0, dt**2 / 2.0],
            [dt**3 / 6.0, dt**2 / 2.0, dt],
        ]
    )
    return StateSpaceModel(
        f=f,
        g=np.eye(3),
        h=np.array([[1.0, 0.0, 0.0]]),
        q_cov=q,
        r_cov=np.array([[0.01]]),
        x0_mean=np.array([1.0, 0.1, 0.0]),
        pi0=0.1 * np.eye(3),
    )


def example2_model(delta):
    """Ill-conditioned variant of the kinematic model.

    The two measurement rows differ only by ``delta`` in one entry and the
    measurement noise covariance is ``delta**2 * I``, so ``delta`` sweeping
    toward machine precision probes round-off robustness.  Gaussian noise
    only; the initial state is standard normal.
    """
    if delta <= 0.0:
        raise ConfigurationError(f"delta must be positive, got {delta}")
    base = example1_model()
    return replace(
        base,
        h=np.array([[1.0, 1.0, 1.0], [1.0, 1.0, 1.0 + delta]]),
        r_cov=delta**2 * np.eye(2),
        x0_mean=np.zeros(3),
        pi0=np.eye(3),
    )


def _psd_factor(cov):
    """Factor ``A`` with ``A @ A.T == cov`` for symmetric PSD ``cov``.

    Tolerates singular covariance (zero eigenvalues), which the degenerate
    zero-noise simulations rely on.
    """
    eigvals, vecs = np.linalg.eigh(cov)
    return vecs * np.sqrt(np.clip(eigvals, 0.0, None))
