"""Input validation helpers shared by the solver, CLI and estimator API."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, UnsupportedDimensionError


def check_dimension(n) -> int:
    if int(n) != n or n < 2:
        raise UnsupportedDimensionError(f"ambient dimension must be an integer >= 2, got {n}")
    return int(n)


def check_spacetime_points(X, n: int) -> np.ndarray:
    """Rows (t, x_1..x_n); returns a float array of shape (B, 1 + n)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n + 1:
        raise ParameterError(f"expected points with {n + 1} columns (t, x), got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ParameterError("spacetime points must be finite")
    return X


def check_space_points(X, n: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n:
        raise ParameterError(f"expected points with {n} columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ParameterError("points must be finite")
    return X


def check_real_samples(values, what: str) -> np.ndarray:
    values = np.asarray(values)
    if np.iscomplexobj(values):
        if np.max(np.abs(values.imag)) > 1e-12 * max(1.0, np.max(np.abs(values.real))):
            raise ParameterError(f"{what} must be real-valued")
        values = values.real
    values = values.astype(float)
    if not np.all(np.isfinite(values)):
        raise ParameterError(f"{what} must be finite on the sample grid")
    return values


def check_unit_vectors(Xhat, tol: float = 1e-10) -> np.ndarray:
    Xhat = np.asarray(Xhat, dtype=float)
    if Xhat.ndim == 1:
        Xhat = Xhat[None, :]
    norms = np.linalg.norm(Xhat, axis=1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise ParameterError("directions must be unit vectors")
    return Xhat / norms[:, None]
