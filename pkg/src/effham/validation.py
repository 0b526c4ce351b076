"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

import numpy as np

from .superop import MAX_DIM, MIN_DIM, DimensionError


def check_generators(X) -> np.ndarray:
    """Coerce to a complex stack ``(n, d**2, d**2)`` of finite superoperators."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise DimensionError(f"expected superoperators of shape (n, d**2, d**2), got {X.shape}")
    d = int(round(np.sqrt(X.shape[1])))
    if d * d != X.shape[1] or not MIN_DIM <= d <= MAX_DIM:
        raise DimensionError(f"superoperator side {X.shape[1]} is not d**2 with {MIN_DIM} <= d <= {MAX_DIM}")
    if not np.all(np.isfinite(X)):
        raise ValueError("generators contain NaN or inf")
    return X


def check_operators(K) -> np.ndarray:
    """Coerce to a complex stack ``(n, d, d)`` of finite operators."""
    K = np.asarray(K, dtype=complex)
    if K.ndim == 2:
        K = K[None]
    if K.ndim != 3 or K.shape[1] != K.shape[2]:
        raise DimensionError(f"expected operators of shape (n, d, d), got {K.shape}")
    if not MIN_DIM <= K.shape[1] <= MAX_DIM:
        raise DimensionError(f"operator dimension {K.shape[1]} outside [{MIN_DIM}, {MAX_DIM}]")
    if not np.all(np.isfinite(K)):
        raise ValueError("operators contain NaN or inf")
    return K


def check_times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1 or np.any(~np.isfinite(times)) or np.any(times < 0):
        raise ValueError("times must be a one-dimensional array of finite non-negative values")
    return times
