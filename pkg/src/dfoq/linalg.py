"""Dense linear-algebra kernel: pseudoinverse, norms, minimum-norm solves.

Everything downstream funnels its matrix work through this module so that
rank decisions are made with one consistent tolerance rule.
"""

from __future__ import annotations

import numpy as np

from .errors import InfeasibleError, InvalidInputError

__all__ = [
    "DEFAULT_RESIDUAL_TOL",
    "pinv",
    "matrix_norm",
    "solve_min_norm",
    "null_space_basis",
    "constrained_least_norm",
    "numerical_rank",
    "rank_tolerance",
]

# Residual acceptance threshold used by the solvers when the caller does not
# supply one.  Overridable per call; the CLI maps DFOQ_TOL onto it.
DEFAULT_RESIDUAL_TOL = 1e-9

_EPS = float(np.finfo(float).eps)


def as_matrix(M, name="matrix"):
    """Validate and return a 2-d float array with finite entries."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError(f"{name} must be a nonempty 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return A


def as_vector(v, name="vector"):
    """Validate and return a 1-d float array with finite entries."""
    x = np.asarray(v, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInputError(f"{name} must be a nonempty 1-d array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return x


def rank_tolerance(M, tol=None):
    """Relative singular-value cutoff for ``M``.

    ``None`` selects ``eps * max(rows, cols)``; singular values at or below
    ``cutoff * sigma_max`` are treated as zero.
    """
    A = as_matrix(M)
    if tol is None:
        return _EPS * max(A.shape)
    tol = float(tol)
    if tol < 0:
        raise InvalidInputError("tolerance must be nonnegative")
    return tol


def pinv(M, tol=None):
    """Moore-Penrose pseudoinverse via SVD with relative truncation ``tol``."""
    A = as_matrix(M)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    rel = rank_tolerance(A, tol)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((A.shape[1], A.shape[0]))
    keep = s > rel * s[0]
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (Vt.T * inv_s) @ U.T


def numerical_rank(M, tol=None):
    """Number of singular values above the relative cutoff."""
    A = as_matrix(M)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tolerance(A, tol) * s[0]))


def matrix_norm(M, kind="spectral"):
    """Matrix norm of the requested kind: op1 | opInf | spectral | frobenius."""
    A = as_matrix(M)
    key = str(kind).lower()
    if key == "op1":
        return float(np.linalg.norm(A, 1))
    if key == "opinf":
        return float(np.linalg.norm(A, np.inf))
    if key == "spectral":
        return float(np.linalg.norm(A, 2))
    if key == "frobenius":
        return float(np.linalg.norm(A, "fro"))
    raise InvalidInputError(f"unknown norm kind {kind!r}")


def solve_min_norm(A, b, tol=None):
    """Minimum-norm least-squares solution of ``A x = b``.

    Returns ``(x, residual)`` where ``residual = ||A x - b||_2``.
    """
    M = as_matrix(A, "A")
    rhs = as_vector(b, "b")
    if rhs.size != M.shape[0]:
        raise InvalidInputError(f"shape mismatch: A is {M.shape}, b has length {rhs.size}")
    x = pinv(M, tol) @ rhs
    residual = float(np.linalg.norm(M @ x - rhs))
    return x, residual


def range_residual(A, b, tol=None):
    """Norm of the component of ``b`` orthogonal to the numerical range of ``A``.

    This is the right consistency measure for ill-conditioned systems: it is
    O(eps ||b||) whenever ``A x = b`` is solvable, independent of cond(A),
    while the recomputed residual of a computed solution grows with cond(A).
    """
    M = as_matrix(A, "A")
    rhs = as_vector(b, "b")
    if rhs.size != M.shape[0]:
        raise InvalidInputError(f"shape mismatch: A is {M.shape}, b has length {rhs.size}")
    U, s, _ = np.linalg.svd(M, full_matrices=True)
    cutoff = rank_tolerance(M, tol) * (s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > cutoff))
    if rank >= U.shape[1]:
        return 0.0
    return float(np.linalg.norm(U[:, rank:].T @ rhs))


def null_space_basis(A, tol=None):
    """Orthonormal basis of the null space of ``A``, one column per direction."""
    M = as_matrix(A, "A")
    _, s, Vt = np.linalg.svd(M)
    cutoff = rank_tolerance(M, tol) * (s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > cutoff))
    return Vt[rank:].T.copy()


def constrained_least_norm(A, b, weights, tol=None):
    """Minimize ``sum_i w_i z_i^2`` subject to ``A z = b`` (null-space method).

    Parameters
    ----------
    weights : nonnegative per-coordinate weights; zero entries leave the
        coordinate free (they only enter through the constraints).

    Returns
    -------
    (z, unique) : the minimizer and whether it is the unique one.  When a
        zero-weight subspace makes the reduced problem singular, ``z`` is the
        minimum-norm representative and ``unique`` is False.

    Raises
    ------
    InfeasibleError : if ``A z = b`` has no solution at the tolerance.
    """
    M = as_matrix(A, "A")
    rhs = as_vector(b, "b")
    w = as_vector(weights, "weights")
    if w.size != M.shape[1]:
        raise InvalidInputError("weights length must match the number of unknowns")
    if np.any(w < 0):
        raise InvalidInputError("weights must be nonnegative")

    z0, residual = solve_min_norm(M, rhs)
    feas_tol = (DEFAULT_RESIDUAL_TOL if tol is None else float(tol)) * (1.0 + np.linalg.norm(rhs))
    if residual > feas_tol:
        raise InfeasibleError(f"constraints inconsistent: residual {residual:.3e} > {feas_tol:.3e}")

    N = null_space_basis(M)
    if N.shape[1] == 0:
        return z0, True

    # Reduced normal equations over y with z = z0 + N y; N has orthonormal
    # columns, so a minimum-norm y gives the minimum-norm optimal z.
    WN = N * w[:, None]
    red = N.T @ WN
    rhs_red = -(WN.T @ z0)
    s = np.linalg.svd(red, compute_uv=False)
    singular = s.size == 0 or s[0] == 0.0 or s[-1] <= rank_tolerance(red) * s[0]
    y, _ = solve_min_norm(red, rhs_red)
    return z0 + N @ y, not singular
