"""Coordinate vectors, the anti-diagonal pairing of N x N, and l_p norms."""

from typing import NamedTuple

import numpy as np

from .errors import DimensionError

__all__ = ["GridIndex", "as_coords", "pair_index", "unpair_index", "lp_norm", "is_independent"]


class GridIndex(NamedTuple):
    """1-based position ``(n, m)`` in the grid N x N."""

    n: int
    m: int


def as_coords(x, dim=None, name="x"):
    """Validate and return ``x`` as a finite 1-D float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise DimensionError(f"{name} has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def pair_index(n, m=None):
    """Anti-diagonal enumeration ``(n+m-2)(n+m-1)/2 + n`` of N x N onto N.

    Accepts either a :class:`GridIndex` or two integers.

    >>> pair_index(1, 1), pair_index(1, 2), pair_index(2, 1)
    (1, 2, 3)
    """
    if m is None:
        n, m = n
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise ValueError(f"grid indices are 1-based, got ({n}, {m})")
    s = n + m
    return (s - 2) * (s - 1) // 2 + n


def unpair_index(k):
    """Inverse of :func:`pair_index`."""
    k = int(k)
    if k < 1:
        raise ValueError(f"pair index must be positive, got {k}")
    s = 2
    while (s - 1) * s // 2 < k:
        s += 1
    n = k - (s - 2) * (s - 1) // 2
    return GridIndex(n, s - n)


def lp_norm(x, p):
    """l_1, l_2 or l_inf norm of a coordinate vector (``p`` in 1, 2, inf)."""
    x = as_coords(x)
    if p == 1:
        return float(np.abs(x).sum())
    if p == 2:
        return float(np.linalg.norm(x))
    if p in (np.inf, "inf", "∞"):
        return float(np.abs(x).max())
    raise ValueError(f"unsupported p={p!r}; use 1, 2 or inf")


def is_independent(vectors, rtol=1e-10):
    """Numerical linear independence by singular values."""
    A = np.atleast_2d(np.asarray(vectors, dtype=float))
    if A.shape[0] == 0:
        return True
    if A.shape[0] > A.shape[1]:
        return False
    s = np.linalg.svd(A, compute_uv=False)
    return bool(s[-1] > rtol * max(s[0], np.finfo(float).tiny))
