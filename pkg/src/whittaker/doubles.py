"""The standard double of sl_n and the Poisson structures it induces.

Flat conventions used throughout:

* a tangent vector v at g has coordinates ``frame.coords(g^{-1} v)``;
* a covector with representative a has flat values ``kappa(a, B_k)``;
* a bivector at a point is a matrix P with pi(a, b) = f_a^T P f_b, so the
  sharp map sends f_a to the tangent coordinates P^T f_a.

On the double D = G x G everything is concatenated componentwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .liegroup import (
    MOMENT_SIGN,
    ChevalleyFrame,
    chevalley_frame,
    killing_form,
    lambda_invert,
    moment_form_rep,
)
from .rootsys import InvalidInput

# -1/2 relates the pushforward of the double's structures along
# (d1, d2) -> d1 d2^{-1} to pi0 (verified numerically on SL_2 and SL_3).
PUSH_SCALE = -0.5


def wedge(U, V) -> np.ndarray:
    """Matrix of sum_k U_k ^ V_k for column stacks U, V."""
    U, V = np.atleast_2d(U), np.atleast_2d(V)
    return U @ V.T - V @ U.T


def double_pairing(a, b) -> complex:
    """<(x1, y1), (x2, y2)> = kappa(x1, x2) - kappa(y1, y2)."""
    return killing_form(a[0], b[0]) - killing_form(a[1], b[1])


@dataclass(frozen=True, eq=False)
class LambdaTensor:
    """Dual bases x_i of the diagonal and xi_i of b x_t bbar."""

    frame: ChevalleyFrame
    xs: tuple
    xis: tuple

    def xi_coords(self) -> np.ndarray:
        """2N x N matrix whose columns are the xi_i in (frame, frame) coordinates."""
        return _xi_coords(self)

    def x_coords(self) -> np.ndarray:
        N = self.frame.dim
        return np.vstack([np.eye(N), np.eye(N)])

    def duality_residual(self) -> float:
        G = np.array([[double_pairing(x, y) for y in self.xis] for x in self.xs])
        return float(np.abs(G - np.eye(len(self.xs))).max())


@lru_cache(maxsize=None)
def _xi_coords(lt: LambdaTensor) -> np.ndarray:
    fr = lt.frame
    out = np.array([np.concatenate([fr.coords(a), fr.coords(b)]) for a, b in lt.xis]).T
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def manin_dual_basis(frame: ChevalleyFrame) -> LambdaTensor:
    """Solve <x_i, xi_j> = delta_ij inside b x_t bbar for the diagonal frame x_i."""
    n = frame.n
    z = np.zeros((n, n), dtype=complex)
    # spanning set of b x_t bbar
    span = [(h, -h) for h in frame.cartan]
    span += [(frame.raising[r], z) for r in frame.roots]
    span += [(z, frame.lowering[r]) for r in frame.roots]
    xs = [(B, B) for B in frame.basis]
    G = np.array([[double_pairing(x, s) for s in span] for x in xs])
    try:
        C = np.linalg.solve(G, np.eye(len(xs)))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - cannot happen for a frame
        raise InvalidInput("degenerate pairing between the Manin factors") from exc
    C = np.where(np.abs(C) < 1e-13, 0.0, C)
    xis = []
    for j in range(len(xs)):
        a = sum(C[k, j] * span[k][0] for k in range(len(span)))
        b = sum(C[k, j] * span[k][1] for k in range(len(span)))
        xis.append((a, b))
    return LambdaTensor(frame, tuple(xs), tuple(xis))


def cobracket(x, frame: ChevalleyFrame) -> np.ndarray:
    """delta(x) as the coefficient matrix C with delta(x) = sum C_jk B_j (x) B_k.

    C_jk = <x_diag, [xi_j, xi_k]>, i.e. delta is dual to the bracket of
    b x_t bbar.
    """
    lt = manin_dual_basis(frame)
    return _bracket_tensor(lt) @ frame.coords(x)


@lru_cache(maxsize=None)
def _bracket_tensor(lt: LambdaTensor) -> np.ndarray:
    N = len(lt.xs)
    fr = lt.frame
    out = np.zeros((N, N, N), dtype=complex)
    for j, (a1, a2) in enumerate(lt.xis):
        for k, (b1, b2) in enumerate(lt.xis):
            c1 = a1 @ b1 - b1 @ a1
            c2 = a2 @ b2 - b2 @ a2
            # <(B_m, B_m), (c1, c2)>
            out[j, k, :] = fr.gram @ fr.coords(c1) - fr.gram @ fr.coords(c2)
    out.setflags(write=False)
    return out


def cocycle_residual(x, y, frame: ChevalleyFrame) -> float:
    """|delta([x,y]) - ad_x delta(y) + ad_y delta(x)|."""
    def act(z, C):
        A = frame.ad(z)
        return A @ C + C @ A.T

    lhs = cobracket(x @ y - y @ x, frame)
    rhs = act(x, cobracket(y, frame)) - act(y, cobracket(x, frame))
    return float(np.abs(lhs - rhs).max())


# bivector pi0 on G


def _root_blocks(frame: ChevalleyFrame):
    r, N = frame.rank, frame.dim
    I = np.eye(N)
    npos = len(frame.roots)
    return I[:, :r], I[:, r : r + npos], I[:, r + npos :]


def pi0_matrix(g) -> np.ndarray:
    """Flat matrix of pi0 at g."""
    g = np.asarray(g, dtype=complex)
    fr = chevalley_frame(g.shape[0])
    A = fr.adjoint(np.linalg.inv(g))  # X^R has left-trivialized coordinates Ad_{g^-1} X
    H, Ep, Em = _root_blocks(fr)
    P = wedge(H, A @ H)
    P = P + 0.5 * (wedge(Ep, Em) + wedge(A @ Ep, A @ Em))
    P = P + wedge(Em, A @ Ep)
    return P


def pi0_eval(g, a, b) -> complex:
    """pi0 at g on covectors with representatives a, b (direct sum of pairings)."""
    g = np.asarray(g, dtype=complex)
    fr = chevalley_frame(g.shape[0])
    gi = np.linalg.inv(g)

    def L(c, X):
        return killing_form(c, X)

    def R(c, X):
        return killing_form(c, gi @ X @ g)

    def w(f1, X, f2, Y):
        return f1(a, X) * f2(b, Y) - f1(b, X) * f2(a, Y)

    s = sum(w(L, h, R, h) for h in fr.cartan)
    for r in fr.roots:
        e, f = fr.raising[r], fr.lowering[r]
        s += 0.5 * (w(L, e, L, f) + w(R, e, R, f))
        s += w(L, f, R, e)
    return complex(s)


# structures on the double


def _double_adjoint_inv(d, fr: ChevalleyFrame) -> np.ndarray:
    d1, d2 = d
    N = fr.dim
    A = np.zeros((2 * N, 2 * N), dtype=complex)
    A[:N, :N] = fr.adjoint(np.linalg.inv(d1))
    A[N:, N:] = fr.adjoint(np.linalg.inv(d2))
    return A


def lambda_matrices(d):
    """(Lambda^L, Lambda^R) at d as flat 2N x 2N matrices."""
    d1 = np.asarray(d[0], dtype=complex)
    fr = chevalley_frame(d1.shape[0])
    lt = manin_dual_basis(fr)
    X, Xi = lt.x_coords(), lt.xi_coords()
    A = _double_adjoint_inv(d, fr)
    return wedge(X, Xi), wedge(A @ X, A @ Xi)


def pid_matrix(sign: int, d) -> np.ndarray:
    """Flat matrix of Lambda^R + sign * Lambda^L at d."""
    if sign not in (1, -1):
        raise InvalidInput("sign must be +1 or -1")
    LL, LR = lambda_matrices(d)
    return LR + sign * LL


def pid_eval(sign: int, d, a, b) -> complex:
    """pi_D^{sign} at d on covectors with representatives a = (a1, a2), b = (b1, b2)."""
    fr = chevalley_frame(np.asarray(d[0]).shape[0])
    fa = double_covector_flat(a, fr)
    fb = double_covector_flat(b, fr)
    return complex(fa @ pid_matrix(sign, d) @ fb)


def double_covector_flat(a, fr: ChevalleyFrame) -> np.ndarray:
    return np.concatenate([fr.covector_flat(a[0]), fr.covector_flat(a[1])])


# generic bivector field


@dataclass(frozen=True)
class BivectorField:
    """One of the structures pi0 (on G), pid_minus or pid_plus (on G x G)."""

    kind: str
    n: int

    KINDS = ("pi0", "pid_minus", "pid_plus")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidInput(f"unknown bivector kind {self.kind!r}")

    @property
    def on_double(self) -> bool:
        return self.kind != "pi0"

    @property
    def frame(self) -> ChevalleyFrame:
        return chevalley_frame(self.n)

    def matrix(self, point) -> np.ndarray:
        if self.kind == "pi0":
            return pi0_matrix(point)
        return pid_matrix(1 if self.kind == "pid_plus" else -1, point)

    def covector_flat(self, a) -> np.ndarray:
        if self.on_double:
            return double_covector_flat(a, self.frame)
        return self.frame.covector_flat(a)

    def evaluate(self, point, a, b) -> complex:
        return complex(self.covector_flat(a) @ self.matrix(point) @ self.covector_flat(b))

    def sharp_coords(self, point, a) -> np.ndarray:
        return self.matrix(point).T @ self.covector_flat(a)

    def sharp(self, point, a):
        """Tangent vector pi^#(a) as a matrix (or pair of matrices on G x G)."""
        return tangent_from_coords(point, self.sharp_coords(point, a), self.frame)


def tangent_from_coords(point, c, fr: ChevalleyFrame):
    if isinstance(point, tuple):
        N = fr.dim
        return (point[0] @ fr.matrix(c[:N]), point[1] @ fr.matrix(c[N:]))
    return np.asarray(point) @ fr.matrix(c)


def tangent_coords(point, v, fr: ChevalleyFrame) -> np.ndarray:
    if isinstance(point, tuple):
        return np.concatenate(
            [fr.coords(np.linalg.solve(point[0], v[0])), fr.coords(np.linalg.solve(point[1], v[1]))]
        )
    return fr.coords(np.linalg.solve(point, v))


def pi_sharp(field: BivectorField, point, a):
    return field.sharp(point, a)


# conjugation, moment maps, dressing


def rho_conj(g, xi) -> np.ndarray:
    """Infinitesimal conjugation xi^L - xi^R = g xi - xi g."""
    return np.asarray(g) @ xi - xi @ np.asarray(g)


def heisenberg_moment(a, b):
    """Moment map (a, b) -> (a b a^{-1}, b^{-1}) of the Heisenberg double."""
    a, b = np.asarray(a), np.asarray(b)
    return (a @ b @ np.linalg.inv(a), np.linalg.inv(b))


def heisenberg_to_double(a, b):
    """Point d = (d1, d2) of G x G with d1 d2^{-1} = a b a^{-1}."""
    a, b = np.asarray(a), np.asarray(b)
    return (a, a @ np.linalg.inv(b))


def double_to_heisenberg(d):
    d1, d2 = d
    return (d1, np.linalg.solve(d2, d1))


def quotient_differential(d, fr: ChevalleyFrame) -> np.ndarray:
    """Flat differential of (d1, d2) -> d1 d2^{-1}: (X1, X2) -> Ad_{d2}(X1 - X2)."""
    A = fr.adjoint(d[1])
    return np.hstack([A, -A])


def dressing_vector(b1, b2, xi):
    """pi_D^- at (b1, b2) applied to the left-invariant form of xi on G*.

    The form (b1 Y1, b2 Y2) -> kappa(xi, Y1) - kappa(xi, Y2) is extended to
    the covector (xi, -xi) on G x G; since pi_D^- is tangent to G* the
    result does not depend on the extension.
    """
    xi = np.asarray(xi)
    n = xi.shape[0]
    fld = BivectorField("pid_minus", n)
    return fld.sharp((np.asarray(b1), np.asarray(b2)), (xi, -xi))


def dressing_residuals(b1, b2, xi) -> tuple[float, float]:
    """(tangency to B x_T bbar, lambda-compatibility with pi0^# alpha_xi)."""
    from .liegroup import alpha_rep

    n = np.asarray(xi).shape[0]
    fr = chevalley_frame(n)
    v1, v2 = dressing_vector(b1, b2, xi)
    Y1 = np.linalg.solve(b1, v1)
    Y2 = np.linalg.solve(b2, v2)
    scale = max(1.0, np.abs(Y1).max(), np.abs(Y2).max())
    tang = max(
        np.abs(np.tril(Y1, -1)).max(),
        np.abs(np.triu(Y2, 1)).max(),
        np.abs(np.diag(Y1) + np.diag(Y2)).max(),
    ) / scale
    g = b1 @ np.linalg.inv(b2)
    pushed = PUSH_SCALE * (quotient_differential((b1, b2), fr) @ np.concatenate([fr.coords(Y1), fr.coords(Y2)]))
    target = pi0_matrix(g).T @ fr.covector_flat(alpha_rep(g, xi))
    comp = np.abs(pushed - target).max() / max(1.0, np.abs(target).max())
    return float(tang), float(comp)


def lambda_poisson_residual(b1, b2) -> float:
    """|PUSH_SCALE * lambda_* pi_D^- - pi0| at lambda(b1, b2)."""
    d = (np.asarray(b1), np.asarray(b2))
    fr = chevalley_frame(d[0].shape[0])
    Dl = quotient_differential(d, fr)
    push = PUSH_SCALE * Dl @ pid_matrix(-1, d) @ Dl.T
    P = pi0_matrix(d[0] @ np.linalg.inv(d[1]))
    return float(np.abs(push - P).max() / max(1.0, np.abs(P).max()))


def moment_residual(space, m, xi) -> float:
    """|rho_M(xi) - MOMENT_SIGN * pi^#(mu^* alpha'_xi)| in flat coordinates.

    ``space`` is a :class:`whittaker.reduction.HamiltonianSpace`; raises
    NotInCell when mu(m) is off the open cell.
    """
    fr = space.frame
    g = space.moment(m)
    a = moment_form_rep(g, xi)
    pulled = space.moment_differential(m).T @ fr.covector_flat(a)
    rhs = MOMENT_SIGN * (space.bivector(m).T @ pulled)
    lhs = space.action_coords(m, xi)
    return float(np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max()))


# Jacobi identity by finite differences


def _exp_small(X) -> np.ndarray:
    from scipy.linalg import expm

    return expm(X)


def entry_differentials(point, fr: ChevalleyFrame) -> np.ndarray:
    """Flat differentials of the matrix-entry functions (rows) at point."""
    if isinstance(point, tuple):
        n2 = fr.n * fr.n
        N = fr.dim
        F = np.zeros((2 * n2, 2 * N), dtype=complex)
        F[:n2, :N] = entry_differentials(point[0], fr)
        F[n2:, N:] = entry_differentials(point[1], fr)
        return F
    g = np.asarray(point)
    # d(g_ij)(g B_k) = (g B_k)_ij
    return np.einsum("ij,kjl->ilk", g, fr.basis).reshape(fr.n * fr.n, fr.dim)


def right_entry_differentials(point, fr: ChevalleyFrame) -> np.ndarray:
    """Like :func:`entry_differentials` but along right-invariant directions B_k g."""
    if isinstance(point, tuple):
        n2 = fr.n * fr.n
        N = fr.dim
        F = np.zeros((2 * n2, 2 * N), dtype=complex)
        F[:n2, :N] = right_entry_differentials(point[0], fr)
        F[n2:, N:] = right_entry_differentials(point[1], fr)
        return F
    g = np.asarray(point)
    return np.einsum("kij,jl->ilk", fr.basis, g).reshape(fr.n * fr.n, fr.dim)


def pi0_brackets(g) -> np.ndarray:
    """Brackets of the matrix entries under pi0, without forming Ad_{g^-1}.

    Equal to F P F^T for the flat matrix P = pi0_matrix(g); evaluating the
    right-invariant parts through B_k g keeps roundoff at the size of g.
    """
    g = np.asarray(g, dtype=complex)
    fr = chevalley_frame(g.shape[0])
    FL, FR = entry_differentials(g, fr), right_entry_differentials(g, fr)
    H, Ep, Em = _root_blocks(fr)
    M = wedge(FL @ H, FR @ H)
    M = M + 0.5 * (wedge(FL @ Ep, FL @ Em) + wedge(FR @ Ep, FR @ Em))
    return M + wedge(FL @ Em, FR @ Ep)


def pid_brackets(sign: int, d) -> np.ndarray:
    """Brackets of the matrix entries of (d1, d2) under Lambda^R + sign * Lambda^L."""
    d1 = np.asarray(d[0], dtype=complex)
    fr = chevalley_frame(d1.shape[0])
    lt = manin_dual_basis(fr)
    X, Xi = lt.x_coords(), lt.xi_coords()
    FL, FR = entry_differentials(d, fr), right_entry_differentials(d, fr)
    return wedge(FR @ X, FR @ Xi) + sign * wedge(FL @ X, FL @ Xi)


def _move(point, k, eps, fr: ChevalleyFrame):
    N = fr.dim
    if isinstance(point, tuple):
        d1, d2 = point
        if k < N:
            return (d1 @ _exp_small(eps * fr.basis[k]), d2)
        return (d1, d2 @ _exp_small(eps * fr.basis[k - N]))
    return np.asarray(point) @ _exp_small(eps * fr.basis[k])


def _brackets_from_matrix(matrix_fn, fr: ChevalleyFrame):
    def brackets(point):
        F = entry_differentials(point, fr)
        return F @ matrix_fn(point) @ F.T

    return brackets


def jacobiator(matrix_fn, point, fr: ChevalleyFrame, step: float = 1e-6, bracket_fn=None) -> float:
    """Max |{f,{g,h}} + cyclic| over matrix-entry functions f, g, h.

    ``matrix_fn(point)`` returns the flat bivector; derivatives of the
    brackets are central differences along left-invariant directions.
    ``bracket_fn(point)``, if given, returns the bracket matrix of the entry
    functions directly and is used for the differenced values.
    """
    brackets = bracket_fn or _brackets_from_matrix(matrix_fn, fr)
    F = entry_differentials(point, fr)
    P = matrix_fn(point)
    dim = P.shape[0]
    dM = np.zeros((dim,) + (F.shape[0], F.shape[0]), dtype=complex)
    for k in range(dim):
        Mp = brackets(_move(point, k, step, fr))
        Mm = brackets(_move(point, k, -step, fr))
        dM[k] = (Mp - Mm) / (2 * step)
    # {f_a, M_bc} = sum_k (F P)_{a k} dM_k[b, c]
    FP = F @ P
    T = np.einsum("ak,kbc->abc", FP, dM)
    J = T + np.transpose(T, (1, 2, 0)) + np.transpose(T, (2, 0, 1))
    return float(np.abs(J).max())


def multiplicativity_residual(g, h) -> float:
    """|P(gh) - P(h) - Ad_{h^-1} P(g) Ad_{h^-1}^T| for pi_D^- on G x G (pairs g, h)."""
    fr = chevalley_frame(np.asarray(g[0]).shape[0])
    gh = (g[0] @ h[0], g[1] @ h[1])
    A = _double_adjoint_inv(h, fr)
    lhs = pid_matrix(-1, gh)
    rhs = pid_matrix(-1, h) + A @ pid_matrix(-1, g) @ A.T
    return float(np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max()))


def lambda_section(g):
    """(b1, b2) over g as a point of G x G."""
    b1, b2 = lambda_invert(g)
    return (b1, b2)
