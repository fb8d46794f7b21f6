"""Cholesky factored-form (square-root) filter recursions.

Both variants carry an upper-triangular square root ``S`` of the error
covariance (``P = S.T @ S``) and advance it through QR triangularizations of
stacked pre-arrays, so the reconstructed covariance is symmetric positive
semi-definite by construction.
"""

import math

import numpy as np

from ..matfact import CholeskyFactor, cov_sqrt_upper, tri_solve, triangularize
from .base import KalmanStepFilter


class _CholeskyBase(KalmanStepFilter):
    def _init_cov(self, pi0):
        return CholeskyFactor.from_matrix(pi0)

    def _noise_terms(self, mats):
        return cov_sqrt_upper(mats.q), cov_sqrt_upper(mats.r)

    def _predict(self, state, mats, noise):
        s_q, _ = noise
        pre = np.vstack([state.cov.s @ mats.f.T, s_q @ mats.g.T])
        return mats.f @ state.x_hat, CholeskyFactor(triangularize(pre))

    def _lambda_norms(self, innovation, state, mats, noise):
        _, s_r = noise
        z_num = tri_solve(s_r, innovation, trans=True)
        z_den = tri_solve(state.cov.s, state.predicted_residual, trans=True)
        return float(z_num @ z_num), float(z_den @ z_den)


class CholMccKf(_CholeskyBase):
    """Square-root variant with separate gain and Joseph refactorization.

    The measurement update first triangularizes the stacked inverse factors
    to get an upper factor of the posterior information matrix, computes the
    gain through two triangular solves, then refactorizes the posterior
    covariance from the Joseph-form pre-array.  The refactorization cannot be
    skipped: dropping it changes the recursion into the improved variant.
    """

    variant = "sr-mcckf"

    def _measurement(self, state, innovation, lam, mats, noise):
        _, s_r = noise
        s_pred = state.cov.s
        n = s_pred.shape[0]
        lam_sqrt = math.sqrt(lam)

        s_pred_inv = tri_solve(s_pred, np.eye(n))
        rinvt_h = tri_solve(s_r, mats.h, trans=True)
        info_factor = triangularize(np.vstack([s_pred_inv.T, lam_sqrt * rinvt_h]))

        ht_rinv = tri_solve(s_r, rinvt_h).T
        w = tri_solve(info_factor, ht_rinv, trans=True)
        gain = lam * tri_solve(info_factor, w)

        x_new = state.x_hat + gain @ innovation
        joseph_pre = np.vstack(
            [s_pred @ (np.eye(n) - gain @ mats.h).T, s_r @ gain.T]
        )
        return x_new, CholeskyFactor(triangularize(joseph_pre)), gain


class CholImccKf(_CholeskyBase):
    """Array square-root variant of the improved filter.

    One triangularization of the two-block pre-array yields the innovation
    covariance factor, the normalized gain and the posterior factor
    simultaneously; the actual gain is recovered by a triangular solve.
    """

    variant = "chol-imcckf"
    produces_re_factor = True

    def _measurement(self, state, innovation, lam, mats, noise):
        _, s_r = noise
        s_pred = state.cov.s
        n = s_pred.shape[0]
        m = innovation.size
        lam_sqrt = math.sqrt(lam)

        pre = np.zeros((m + n, m + n))
        pre[:m, :m] = s_r
        pre[m:, :m] = lam_sqrt * (s_pred @ mats.h.T)
        pre[m:, m:] = s_pred
        post = triangularize(pre)
        re_sqrt = post[:m, :m]
        kbar_t = post[:m, m:]
        s_new = post[m:, m:]

        gain = lam_sqrt * tri_solve(re_sqrt, kbar_t).T
        x_new = state.x_hat + gain @ innovation
        return x_new, CholeskyFactor(s_new), gain
