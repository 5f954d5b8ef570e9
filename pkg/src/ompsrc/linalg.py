"""Dense vector and matrix primitives used by the solvers.

Vectors are 1-D float64 arrays and matrices are 2-D float64 arrays
(numpy's default C layout). Every public function validates shape and
finiteness and returns fresh arrays; nothing is modified in place.
"""

import numpy as np

from .errors import DimensionError, InvalidInputError

#: Below this l2 norm a vector is treated as zero and left unnormalized.
ZERO_NORM = 1e-12

#: Singular values below RANK_RTOL * (largest singular value) count as zero.
RANK_RTOL = 1e-10


def as_vector(v, name="vector"):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains NaN or Inf")
    return arr


def as_matrix(B, name="matrix"):
    arr = np.asarray(B, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains NaN or Inf")
    return arr


def normalize_l2(v):
    """Scale `v` to unit l2 norm.

    A vector whose norm is below ``ZERO_NORM`` is returned unchanged, so
    an all-zero patch stays all-zero instead of dividing by zero.
    """
    v = as_vector(v)
    norm = np.linalg.norm(v)
    if norm < ZERO_NORM:
        return v.copy()
    return v / norm


def normalize_columns(B):
    """Apply :func:`normalize_l2` to every column of `B`."""
    B = as_matrix(B)
    norms = np.linalg.norm(B, axis=0)
    safe = np.where(norms < ZERO_NORM, 1.0, norms)
    return B / safe


def least_squares(B, y):
    """Minimum-norm least-squares solution of ``B @ x ~= y``.

    Solved through an SVD-based rank-revealing factorization; singular
    values under ``RANK_RTOL`` relative to the largest are dropped, which
    gives the pseudo-inverse solution for rank-deficient `B`.

    Parameters
    ----------
    B : array_like, shape (m, k)
    y : array_like, shape (m,)

    Returns
    -------
    x : ndarray, shape (k,)
    """
    B = as_matrix(B, "B")
    y = as_vector(y, "y")
    if B.shape[0] != y.shape[0]:
        raise DimensionError(f"B has {B.shape[0]} rows but y has length {y.shape[0]}")
    if B.shape[1] < 1:
        raise DimensionError("B must have at least one column")
    x, _, _, _ = np.linalg.lstsq(B, y, rcond=RANK_RTOL)
    return x


def residual_norm(B, x, y):
    """Return ``||y - B @ x||_2``."""
    B = as_matrix(B, "B")
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if B.shape != (y.shape[0], x.shape[0]):
        raise DimensionError(
            f"B has shape {B.shape}, expected ({y.shape[0]}, {x.shape[0]})")
    return float(np.linalg.norm(y - B @ x))
