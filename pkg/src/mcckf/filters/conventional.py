"""Conventional (full-covariance) filter recursions.

These propagate the full error covariance matrix and solve the normal
equations directly, with no factored-form protection.  They are the fastest
implementations and the reference points the factored variants must agree
with, but they lose symmetry and definiteness first under roundoff.
"""

import numpy as np

from ..correntropy import weighted_norm_sq
from .base import FullCovariance, KalmanStepFilter


class _ConventionalBase(KalmanStepFilter):
    def _init_cov(self, pi0):
        return FullCovariance(pi0.copy())

    def _predict(self, state, mats, noise):
        p = state.cov.matrix
        p_pred = mats.f @ p @ mats.f.T + mats.g @ mats.q @ mats.g.T
        return mats.f @ state.x_hat, FullCovariance(p_pred)

    def _lambda_norms(self, innovation, state, mats, noise):
        num = weighted_norm_sq(innovation, mats.r)
        den = weighted_norm_sq(state.predicted_residual, state.cov.matrix)
        return num, den


class MccKf(_ConventionalBase):
    """Correntropy filter with the information-form gain and Joseph update.

    The gain folds the inflation scalar into the information matrix; the
    posterior covariance is recomputed by the symmetric Joseph-stabilized
    formula with the scalar omitted, trading a little accuracy for symmetry.
    """

    variant = "mcckf"

    def _measurement(self, state, innovation, lam, mats, noise):
        p_pred = state.cov.matrix
        n = p_pred.shape[0]
        eye = np.eye(n)
        p_pred_inv = np.linalg.solve(p_pred, eye)
        ht_rinv = np.linalg.solve(mats.r.T, mats.h).T
        info = p_pred_inv + lam * (ht_rinv @ mats.h)
        gain = lam * np.linalg.solve(info, ht_rinv)
        i_kh = eye - gain @ mats.h
        p_new = i_kh @ p_pred @ i_kh.T + gain @ mats.r @ gain.T
        x_new = state.x_hat + gain @ innovation
        return x_new, FullCovariance(p_new), gain


class ImccKf(_ConventionalBase):
    """Improved variant: innovation-covariance gain, one-sided covariance update."""

    variant = "imcckf"

    def _measurement(self, state, innovation, lam, mats, noise):
        p_pred = state.cov.matrix
        r_e = lam * (mats.h @ p_pred @ mats.h.T) + mats.r
        gain = lam * np.linalg.solve(r_e.T, mats.h @ p_pred.T).T
        p_new = (np.eye(p_pred.shape[0]) - gain @ mats.h) @ p_pred
        x_new = state.x_hat + gain @ innovation
        return x_new, FullCovariance(p_new), gain


class ClassicalKf(_ConventionalBase):
    """Reference Kalman filter (unit inflation scalar, Joseph update)."""

    variant = "kf"

    def _compute_lambda(self, innovation, state, mats, noise):
        return 1.0

    def _measurement(self, state, innovation, lam, mats, noise):
        p_pred = state.cov.matrix
        s = mats.h @ p_pred @ mats.h.T + mats.r
        gain = np.linalg.solve(s.T, mats.h @ p_pred.T).T
        i_kh = np.eye(p_pred.shape[0]) - gain @ mats.h
        p_new = i_kh @ p_pred @ i_kh.T + gain @ mats.r @ gain.T
        x_new = state.x_hat + gain @ innovation
        return x_new, FullCovariance(p_new), gain
