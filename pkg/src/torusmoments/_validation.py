"""Input validation helpers shared by the estimators and functional API."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array


def check_order(n, name="n", minimum=0):
    """Return ``n`` as a Python int, rejecting non-integers and small values."""
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(n).__name__}")
    if n < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {n}")
    return int(n)


def check_points(X, dim=None, wrap=True):
    """Validate an array of points on the torus.

    One-dimensional input is read as ``M`` points in dimension 1 when
    ``dim`` is 1 or unknown, and as a single point otherwise.

    Parameters
    ----------
    X : array_like of shape (M, d) or (M,)
    dim : int, optional
        Expected dimension.
    wrap : bool, default=True
        Reduce coordinates modulo one into ``[0, 1)``.

    Returns
    -------
    ndarray of shape (M, d)
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1) if dim in (None, 1) else X.reshape(1, -1)
    X = check_array(X, dtype=float, ensure_2d=True)
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"points have dimension {X.shape[1]}, expected {dim}")
    if wrap:
        X = np.mod(X, 1.0)
        X[X >= 1.0] = 0.0
    return X


def check_weights(weights, size=None):
    w = np.atleast_1d(np.asarray(weights, dtype=complex))
    if w.ndim != 1:
        raise ValueError("weights must be one-dimensional")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if size is not None and w.shape[0] != size:
        raise ValueError(f"got {w.shape[0]} weights for {size} points")
    if np.all(w.imag == 0):
        return w.real.copy()
    return w


def wrap_distance(x, y, p=np.inf):
    """Wrap-around p-norm distance between broadcastable point arrays."""
    diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    diff = np.mod(diff, 1.0)
    diff = np.minimum(diff, 1.0 - diff)
    if p == np.inf:
        return diff.max(axis=-1)
    if p == 1:
        return diff.sum(axis=-1)
    return np.linalg.norm(diff, ord=p, axis=-1)


def min_separation(points):
    """Smallest pairwise wrap-around max-norm distance (``inf`` for one point)."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return np.inf
    d = wrap_distance(points[:, None, :], points[None, :, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())
