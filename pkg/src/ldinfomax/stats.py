"""Sample statistics and log-determinant information measures.

Second-order building blocks for the separation objective: biased sample
covariances, regularized log-determinants computed through Cholesky
factorizations, the log-determinant (LD) entropy of a covariance matrix,
the error covariance of the best regularized linear predictor, and the
LD-mutual information between two sample sets.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

__all__ = [
    "CovarianceBundle",
    "LOG_2PI_E",
    "conditional_error_covariance",
    "cross_covariance",
    "ld_entropy",
    "ld_mutual_information",
    "logdet_regularized",
    "sample_covariance",
]

LOG_2PI_E = float(np.log(2.0 * np.pi * np.e))

_SYMMETRY_RTOL = 1e-12


def _as_samples(x, name="x"):
    """Validate a channels-by-samples matrix and return it as float ndarray."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"{name} must be 2-D (channels x samples), got ndim={x.ndim}")
    if x.shape[1] < 2:
        raise ValueError(f"{name} needs at least 2 samples, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def _symmetrize(a):
    return 0.5 * (a + a.T)


def _check_symmetric(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > _SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric within tolerance")
    return a


def sample_covariance(x):
    """Biased (1/N) sample covariance of the columns of ``x``.

    Parameters
    ----------
    x : ndarray, shape (r, N)
        Sample matrix, one channel per row, one observation per column.

    Returns
    -------
    ndarray, shape (r, r)
        Symmetrized sample covariance ``X Xᵀ/N - (X 1)(X 1)ᵀ/N²``.
    """
    x = _as_samples(x)
    xc = x - x.mean(axis=1, keepdims=True)
    return _symmetrize(xc @ xc.T / x.shape[1])


def cross_covariance(s, y):
    """Biased (1/N) cross covariance between the columns of ``s`` and ``y``.

    Both inputs must have the same number of columns. ``cross_covariance(x, x)``
    equals ``sample_covariance(x)``.
    """
    s = _as_samples(s, "s")
    y = _as_samples(y, "y")
    if s.shape[1] != y.shape[1]:
        raise ValueError(
            f"sample counts differ: s has {s.shape[1]}, y has {y.shape[1]}"
        )
    n = s.shape[1]
    sc = s - s.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    return sc @ yc.T / n


def logdet_regularized(cov, epsilon):
    """log det(cov + epsilon*I) via Cholesky of the symmetrized argument.

    Raises
    ------
    numpy.linalg.LinAlgError
        If ``cov + epsilon*I`` is not positive definite. A non-PD shifted
        matrix signals an invalid numerical state rather than a -inf value.
    """
    cov = _check_symmetric(cov, "cov")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    shifted = _symmetrize(cov) + epsilon * np.eye(cov.shape[0])
    try:
        c, _ = cho_factor(shifted, lower=True)
    except LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"cov + {epsilon}*I is not positive definite: {exc}"
        ) from exc
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def ld_entropy(cov, epsilon):
    """Log-determinant entropy of a covariance matrix.

    ``0.5 * logdet(cov + epsilon*I) + (r/2) * log(2*pi*e)`` where ``r`` is the
    matrix dimension. ``epsilon`` keeps the value finite for singular
    covariances.
    """
    r = np.asarray(cov).shape[0]
    return 0.5 * logdet_regularized(cov, epsilon) + 0.5 * r * LOG_2PI_E


@dataclass(frozen=True)
class CovarianceBundle:
    """Covariance statistics shared by the conditional-entropy computations.

    Attributes
    ----------
    r_s : ndarray, shape (r, r)
        Covariance of the conditioned block.
    r_y : ndarray, shape (M, M)
        Covariance of the conditioning block.
    r_sy : ndarray, shape (r, M)
        Cross covariance between the blocks.
    epsilon : float
        Positive regularization added to the diagonal before inversion.
    """

    r_s: np.ndarray
    r_y: np.ndarray
    r_sy: np.ndarray
    epsilon: float

    def __post_init__(self):
        r_s = _check_symmetric(self.r_s, "r_s")
        r_y = _check_symmetric(self.r_y, "r_y")
        r_sy = np.asarray(self.r_sy, dtype=float)
        if r_sy.shape != (r_s.shape[0], r_y.shape[0]):
            raise ValueError(
                f"r_sy must have shape {(r_s.shape[0], r_y.shape[0])}, got {r_sy.shape}"
            )
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        for name, mat in (("r_s", r_s), ("r_y", r_y)):
            w = np.linalg.eigvalsh(_symmetrize(mat))
            if w[0] < -1e-10 * max(1.0, abs(w[-1])):
                raise ValueError(f"{name} is not positive semidefinite (min eig {w[0]})")
        object.__setattr__(self, "r_s", r_s)
        object.__setattr__(self, "r_y", r_y)
        object.__setattr__(self, "r_sy", r_sy)


def conditional_error_covariance(bundle):
    """Error covariance of the best ridge-regularized linear predictor.

    Returns the symmetrized ``r_s - r_sy (r_y + eps*I)^{-1} r_syᵀ``, the
    covariance left in the first block after linearly estimating it from the
    second. The result plus ``eps*I`` is positive definite for any PSD bundle.
    """
    eps = bundle.epsilon
    m = bundle.r_y.shape[0]
    try:
        c = cho_factor(_symmetrize(bundle.r_y) + eps * np.eye(m), lower=True)
    except LinAlgError as exc:
        raise np.linalg.LinAlgError(f"r_y + {eps}*I failed to factorize: {exc}") from exc
    reduction = bundle.r_sy @ cho_solve(c, bundle.r_sy.T)
    return _symmetrize(bundle.r_s - reduction)


def ld_mutual_information(s, y, epsilon):
    """LD-mutual information between two sample sets sharing a time axis.

    ``0.5*logdet(R_s + eps*I) - 0.5*logdet(R_e + eps*I)`` with ``R_e`` the
    conditional error covariance of ``s`` given ``y``. Nonnegative, and zero
    exactly when the sample cross covariance vanishes.

    Parameters
    ----------
    s : ndarray, shape (r, N)
    y : ndarray, shape (M, N)
    epsilon : float
        Positive regularizer applied to every log-determinant.
    """
    r_s = sample_covariance(s)
    r_y = sample_covariance(y)
    r_sy = cross_covariance(s, y)
    r_e = conditional_error_covariance(CovarianceBundle(r_s, r_y, r_sy, epsilon))
    return 0.5 * (logdet_regularized(r_s, epsilon) - logdet_regularized(r_e, epsilon))
