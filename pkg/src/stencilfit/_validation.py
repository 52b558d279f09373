"""Input validation helpers for the estimator layer."""

from __future__ import annotations

import numpy as np


def check_snapshot_matrix(X, name="X"):
    """Validate and convert an (n_samples, n_dofs) snapshot matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D (n_samples, n_dofs), got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError(f"{name} needs at least 2 samples, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_consistent_shapes(X, y):
    if X.shape != y.shape:
        raise ValueError(f"X {X.shape} and y {y.shape} must have identical shapes")


def check_odd_stencil_size(size, name="stencil size"):
    size = int(size)
    if size < 3 or size % 2 == 0:
        raise ValueError(f"{name} must be odd and >= 3, got {size}")
    return size


def check_state_vector(u, n, name="u0"):
    u = np.asarray(u, dtype=float).ravel()
    if u.shape != (n,):
        raise ValueError(f"{name} must have {n} entries, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{name} contains non-finite values")
    return u
