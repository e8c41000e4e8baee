"""Rank decisions and subspace comparisons shared by the geometric modules."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

RANK_RTOL = 1e-9
SUBSPACE_TOL = 1e-9


def singular_values(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def numerical_rank(M, rtol: float = RANK_RTOL, atol: float = 0.0) -> int:
    s = singular_values(M)
    if s.size == 0 or s[0] <= atol:
        return 0
    return int(np.sum(s > max(rtol * s[0], atol)))


def null_space(M, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the nullspace, using the relative rank threshold."""
    M = np.atleast_2d(np.asarray(M))
    if M.shape[0] == 0:
        return np.eye(M.shape[1], dtype=M.dtype if np.iscomplexobj(M) else float)
    return sla.null_space(M, rcond=rtol)


def orth(M, rtol: float = RANK_RTOL, atol: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the column span; singular values <= max(rtol s_max, atol) are dropped."""
    M = np.atleast_2d(np.asarray(M))
    if M.shape[1] == 0 or not np.any(M):
        return np.zeros((M.shape[0], 0), dtype=M.dtype)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    keep = s > max(rtol * s[0], atol)
    return U[:, keep]


def subspace_distance(A, B) -> float:
    """Largest principal angle between column spans (inf if dimensions differ)."""
    A, B = orth(A), orth(B)
    if A.shape[1] != B.shape[1]:
        return float("inf")
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(sla.subspace_angles(A, B)))


def containment_residual(A, B) -> float:
    """Relative size of the part of span(A) that sticks out of span(B)."""
    A = np.atleast_2d(np.asarray(A))
    if A.shape[1] == 0 or not np.any(A):
        return 0.0
    Q = orth(B)
    R = A - Q @ (Q.conj().T @ A)
    return float(np.linalg.norm(R) / max(np.linalg.norm(A), 1.0))


def intersection(A, B, rtol: float = RANK_RTOL) -> np.ndarray:
    """Basis of span(A) cap span(B)."""
    A, B = orth(A, rtol), orth(B, rtol)
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    K = null_space(np.hstack([A, -B]), rtol)
    return orth(A @ K[: A.shape[1]], rtol)


def max_abs(M) -> float:
    M = np.asarray(M)
    return float(np.abs(M).max()) if M.size else 0.0
