"""UD factored-form (square-root-free) filter recursions.

Both variants carry the modified Cholesky factors ``U`` (unit upper
triangular) and ``d`` (diagonal) of the error covariance and advance them
through weighted Gram-Schmidt orthogonalizations, avoiding square roots in
the covariance propagation itself.
"""

import math

import numpy as np

from ..errors import InvalidWeightError
from ..matfact import UDFactor, mwgs, tri_solve, ud_decompose
from .base import KalmanStepFilter


def _mwgs_nonzero(a_transpose, weights):
    """MWGS after dropping columns whose weight is exactly zero.

    Zero-weight columns contribute nothing to the weighted Gram product, so
    dropping them is an exact transformation; it admits positive
    semi-definite noise covariances.
    """
    mask = weights != 0.0
    if not mask.all():
        a_transpose = a_transpose[:, mask]
        weights = weights[mask]
        if a_transpose.shape[1] < a_transpose.shape[0]:
            raise InvalidWeightError(
                "too few positive-weight columns for the orthogonalization"
            )
    return mwgs(a_transpose, weights)


class _UdBase(KalmanStepFilter):
    def _init_cov(self, pi0):
        return UDFactor.from_matrix(pi0)

    def _noise_terms(self, mats):
        return ud_decompose(mats.q), ud_decompose(mats.r)

    def _predict(self, state, mats, noise):
        (u_q, d_q), _ = noise
        a_t = np.hstack([mats.f @ state.cov.u, mats.g @ u_q])
        weights = np.concatenate([state.cov.d, d_q])
        u_pred, d_pred = _mwgs_nonzero(a_t, weights)
        return mats.f @ state.x_hat, UDFactor(u_pred, d_pred)

    def _lambda_norms(self, innovation, state, mats, noise):
        _, (u_r, d_r) = noise
        z_num = tri_solve(u_r, innovation, unit_diagonal=True)
        z_den = tri_solve(state.cov.u, state.predicted_residual, unit_diagonal=True)
        return float(np.sum(z_num * z_num / d_r)), float(np.sum(z_den * z_den / state.cov.d))


class UdMccKf(_UdBase):
    """UD variant with separate gain and Joseph reorthogonalization.

    Three orthogonalizations per step: the time update, an inverse-factor
    update giving the posterior information factors for the gain, and the
    Joseph-form recomputation of the carried posterior factors.
    """

    variant = "ud-mcckf"

    def _measurement(self, state, innovation, lam, mats, noise):
        _, (u_r, d_r) = noise
        u_pred, d_pred = state.cov.u, state.cov.d
        n = u_pred.shape[0]
        lam_sqrt = math.sqrt(lam)

        u_pred_inv = tri_solve(u_pred, np.eye(n), unit_diagonal=True)
        u_r_inv_h = tri_solve(u_r, mats.h, unit_diagonal=True)
        a_t = np.hstack([u_pred_inv.T, lam_sqrt * u_r_inv_h.T])
        weights = np.concatenate([1.0 / d_pred, 1.0 / d_r])
        b, d_b = mwgs(a_t, weights)

        rinv_h = tri_solve(u_r, u_r_inv_h / d_r[:, None], trans=True, unit_diagonal=True)
        ht_rinv = rinv_h.T
        w = tri_solve(b, ht_rinv, unit_diagonal=True)
        z = tri_solve(b, w / d_b[:, None], trans=True, unit_diagonal=True)
        gain = lam * z

        x_new = state.x_hat + gain @ innovation
        a_t2 = np.hstack([(np.eye(n) - gain @ mats.h) @ u_pred, gain @ u_r])
        weights2 = np.concatenate([d_pred, d_r])
        u_new, d_new = _mwgs_nonzero(a_t2, weights2)
        return x_new, UDFactor(u_new, d_new), gain


class UdImccKf(_UdBase):
    """Array UD variant of the improved filter.

    A single orthogonalization of the two-by-two block pre-array delivers the
    posterior factors, the innovation-covariance factors and the normalized
    gain together; only the innovation-covariance factor is ever solved
    against.
    """

    variant = "ud-imcckf"
    produces_re_factor = True

    def _measurement(self, state, innovation, lam, mats, noise):
        _, (u_r, d_r) = noise
        u_pred, d_pred = state.cov.u, state.cov.d
        n = u_pred.shape[0]
        m = innovation.size
        lam_sqrt = math.sqrt(lam)

        a_t = np.zeros((n + m, n + m))
        a_t[:n, :n] = u_pred
        a_t[n:, :n] = lam_sqrt * (mats.h @ u_pred)
        a_t[n:, n:] = u_r
        weights = np.concatenate([d_pred, d_r])
        b, d_b = _mwgs_nonzero(a_t, weights)

        u_new = b[:n, :n]
        kbar_u = b[:n, n:]
        u_re = b[n:, n:]
        x_new = state.x_hat + lam_sqrt * (
            kbar_u @ tri_solve(u_re, innovation, unit_diagonal=True)
        )
        gain = lam_sqrt * tri_solve(u_re, kbar_u.T, trans=True, unit_diagonal=True).T
        return x_new, UDFactor(u_new, d_b[:n]), gain
