"""Small input checks shared by the analytic modules."""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-12
VERTICES = (1, 2, 3, 4, 5)


def check_vertex(label) -> int:
    """Return the 0-based index of a 1-based vertex label."""
    if isinstance(label, bool) or not isinstance(label, (int, np.integer)):
        raise TypeError(f"vertex label must be an int in 1..5, got {label!r}")
    if label not in VERTICES:
        raise ValueError(f"vertex label must be in 1..5, got {label}")
    return int(label) - 1


def check_unit(vec, tol: float = DEFAULT_TOL, name: str = "vector") -> np.ndarray:
    arr = np.asarray(vec, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"{name} is not unit length (norm {norm!r}, tol {tol})")
    return arr


def check_orthonormal(vectors, tol: float = DEFAULT_TOL, name: str = "basis") -> np.ndarray:
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square array of row vectors, got shape {arr.shape}")
    gram = arr @ arr.T
    err = float(np.max(np.abs(gram - np.eye(arr.shape[0]))))
    if err > tol:
        raise ValueError(f"{name} is not orthonormal (max Gram deviation {err:.3e})")
    return arr


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return int(value)
