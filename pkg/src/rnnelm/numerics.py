"""Dense-matrix primitives: thin SVD and the Moore-Penrose pseudo-inverse.

Matrices are plain 2-D float64 numpy arrays throughout the library.
"""

import numpy as np

from .errors import InvalidInputError, NumericalFailureError, ShapeError

__all__ = ["as_matrix", "svd", "pinv", "default_rcond"]


def as_matrix(a, name="matrix"):
    """Validate and return `a` as a non-empty, finite, 2-D float64 array.

    Raises InvalidInputError on NaN/Inf or an empty array, ShapeError if
    `a` is not 2-D.
    """
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {out.shape}")
    if out.size == 0:
        raise InvalidInputError(f"{name} is empty (shape {out.shape})")
    if not np.isfinite(out).all():
        raise InvalidInputError(f"{name} contains NaN or Inf entries")
    return out


def default_rcond(shape):
    """Relative singular-value cutoff: machine epsilon times the larger dimension."""
    return np.finfo(np.float64).eps * max(shape)


def svd(a):
    """Thin singular value decomposition A = U @ diag(S) @ Vt.

    Returns (U, S, Vt) with S non-negative and non-increasing, the columns
    of U and rows of Vt orthonormal.

    Raises InvalidInputError for non-finite input and NumericalFailureError
    if the underlying iterative factorization does not converge.
    """
    a = as_matrix(a)
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge: {exc}") from exc


def pinv(a, rcond=None):
    """Moore-Penrose pseudo-inverse built from the thin SVD.

    Singular values below rcond * sigma_max are treated as zero; the rest
    are reciprocated. Defaults rcond to eps * max(rows, cols). The result
    satisfies the four Penrose conditions.
    """
    a = as_matrix(a)
    if rcond is None:
        rcond = default_rcond(a.shape)
    if rcond < 0:
        raise InvalidInputError(f"rcond must be >= 0, got {rcond}")
    u, s, vt = svd(a)
    cutoff = rcond * (s[0] if s.size else 0.0)
    inv_s = np.zeros_like(s)
    keep = s > cutoff
    inv_s[keep] = 1.0 / s[keep]
    return (vt.T * inv_s) @ u.T
