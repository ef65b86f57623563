"""Input checks shared by the estimator classes."""

import numpy as np
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array


def check_points(X):
    """Finite float array of 3D points, shape (n, 3)."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 3:
        raise ValueError(f"expected points with 3 coordinates, got {X.shape[1]}")
    return X


def check_betas(betas):
    """Strictly increasing positive couplings as a 1D float array."""
    b = check_array(np.atleast_1d(betas), dtype=np.float64, ensure_2d=False)
    if b.ndim != 1:
        raise ValueError("betas must be one-dimensional")
    if np.any(b <= 0):
        raise ValueError("betas must be positive")
    if np.any(np.diff(b) <= 0):
        raise ValueError("betas must be strictly increasing")
    return b


def check_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise NotFittedError(f"{type(estimator).__name__} is not fitted yet; call fit first")
