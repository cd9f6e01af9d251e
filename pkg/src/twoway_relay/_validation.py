"""Input checks for complex channel and beamformer arrays.

scikit-learn's ``check_array`` refuses complex input, so the handful of
checks needed here are kept local.
"""
import numbers

import numpy as np


def check_complex_matrix(x, name="array", shape=None, square=False):
    """Return ``x`` as a finite 2-D complex128 array."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"{name} must be numeric, got dtype {arr.dtype}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or inf")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"{name} must have shape {tuple(shape)}, got {arr.shape}")
    return arr


def check_positive_vector(x, size, name="array", allow_zero=False):
    """Broadcast a scalar or sequence to a length-``size`` float vector and check its sign."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = np.full(size, float(arr))
    if arr.shape != (size,):
        raise ValueError(f"{name} must have length {size}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or inf")
    bad = arr < 0 if allow_zero else arr <= 0
    if np.any(bad):
        kind = "nonnegative" if allow_zero else "positive"
        raise ValueError(f"{name} must be {kind}, got {arr}")
    return arr


def check_positive_scalar(x, name="value"):
    if not isinstance(x, numbers.Real) or not np.isfinite(x) or x <= 0:
        raise ValueError(f"{name} must be a positive finite real, got {x!r}")
    return float(x)
