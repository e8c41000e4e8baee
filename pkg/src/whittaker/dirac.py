"""Pointwise linear Dirac structures.

A Lagrangian subspace of V + V* is stored as a 2n x n matrix whose first n
rows hold the V-parts and last n rows the V*-parts of a spanning set.
The pairing is the complex-bilinear <(v, a), (w, b)> = a(w) + b(v).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import RANK_RTOL, SUBSPACE_TOL, null_space, numerical_rank, orth, subspace_distance
from .rootsys import InvalidInput

ISOTROPY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LagrangianSubspace:
    ambient_dim: int
    basis: np.ndarray

    @classmethod
    def from_span(cls, M, n: int | None = None, check: bool = True) -> "LagrangianSubspace":
        M = np.asarray(M, dtype=complex)
        n = M.shape[0] // 2 if n is None else n
        Q = orth(M)
        L = cls(n, Q)
        if check:
            if Q.shape[1] != n:
                raise InvalidInput(f"span has dimension {Q.shape[1]}, expected {n}")
            if L.isotropy_residual() > ISOTROPY_TOL:
                raise InvalidInput("span is not isotropic")
        return L

    @property
    def v_part(self) -> np.ndarray:
        return self.basis[: self.ambient_dim]

    @property
    def covector_part(self) -> np.ndarray:
        return self.basis[self.ambient_dim :]

    def isotropy_residual(self) -> float:
        X, Y = self.v_part, self.covector_part
        G = Y.T @ X + X.T @ Y
        return float(np.abs(G).max()) if G.size else 0.0

    def distance(self, other: "LagrangianSubspace") -> float:
        return subspace_distance(self.basis, other.basis)

    def same_as(self, other: "LagrangianSubspace", tol: float = SUBSPACE_TOL) -> bool:
        return self.ambient_dim == other.ambient_dim and self.distance(other) < tol


def _check_antisym(M, what: str) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput(f"{what} must be square")
    if np.abs(M + M.T).max(initial=0.0) > 1e-10 * max(1.0, np.abs(M).max(initial=0.0)):
        raise InvalidInput(f"{what} is not antisymmetric")
    return M


def graph_of_bivector(Pi) -> LagrangianSubspace:
    """{(Pi a, a)} with columns (Pi e_i, e_i)."""
    Pi = _check_antisym(Pi, "bivector")
    n = Pi.shape[0]
    return LagrangianSubspace.from_span(np.vstack([Pi, np.eye(n)]), n)


def graph_of_two_form(omega) -> LagrangianSubspace:
    """{(v, omega v)} with columns (e_i, omega e_i)."""
    omega = _check_antisym(omega, "two-form")
    n = omega.shape[0]
    return LagrangianSubspace.from_span(np.vstack([np.eye(n), omega]), n)


def dirac_pullback(phi, L: LagrangianSubspace) -> LagrangianSubspace:
    """{(w, phi^T a) : (phi w, a) in L} for phi: W -> V (dim V x dim W)."""
    phi = np.atleast_2d(np.asarray(phi, dtype=complex))
    m, k = phi.shape
    if m != L.ambient_dim:
        raise InvalidInput(f"map target dim {m} != {L.ambient_dim}")
    X, Y = L.v_part, L.covector_part
    K = null_space(np.hstack([phi, -X]))
    w, c = K[:k], K[k:]
    return LagrangianSubspace.from_span(np.vstack([w, phi.T @ (Y @ c)]), k)


def dirac_pushforward(psi, L: LagrangianSubspace) -> LagrangianSubspace:
    """{(psi v, b) : (v, psi^T b) in L} for psi: V -> W (dim W x dim V)."""
    psi = np.atleast_2d(np.asarray(psi, dtype=complex))
    m, k = psi.shape
    if k != L.ambient_dim:
        raise InvalidInput(f"map source dim {k} != {L.ambient_dim}")
    X, Y = L.v_part, L.covector_part
    K = null_space(np.hstack([Y, -psi.T]))
    c, b = K[: X.shape[1]], K[X.shape[1] :]
    return LagrangianSubspace.from_span(np.vstack([psi @ (X @ c), b]), m)


@dataclass(frozen=True)
class DiracClassification:
    kernel_dim: int
    cokernel_dim: int
    bivector: np.ndarray | None
    two_form: np.ndarray | None


def kernel_and_classify(L: LagrangianSubspace, rtol: float = RANK_RTOL) -> DiracClassification:
    X, Y = L.v_part, L.covector_part
    n = L.ambient_dim
    # the basis is orthonormal, so singular values of either block lie in [0, 1]
    kdim = n - numerical_rank(Y, rtol, atol=rtol) if n else 0
    cdim = n - numerical_rank(X, rtol, atol=rtol) if n else 0
    biv = form = None
    if kdim == 0:
        biv = X @ np.linalg.inv(Y)
        biv = 0.5 * (biv - biv.T)
    if cdim == 0:
        form = Y @ np.linalg.inv(X)
        form = 0.5 * (form - form.T)
    return DiracClassification(kdim, cdim, biv, form)


def leaf_data(L: LagrangianSubspace, rtol: float = RANK_RTOL):
    """Basis Q of the anchor image and the induced 2-form on it (in Q-coordinates)."""
    X, Y = L.v_part, L.covector_part
    Q = orth(X, rtol)
    if Q.shape[1] == 0:
        return Q, np.zeros((0, 0), dtype=complex)
    # c with X c = Q (least squares; kernel directions give covectors that kill the image)
    C = np.linalg.lstsq(X, Q, rcond=None)[0]
    A = Y @ C  # covectors attached to each image basis vector
    form = Q.T @ A
    return Q, 0.5 * (form - form.T)
