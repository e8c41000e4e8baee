"""Matrix realization of SL_n(C) and sl_n(C).

Covectors at a group element g are represented by Lie algebra elements a,
paired with a tangent vector v at g as ``killing_form(a, g^{-1} v)``.
Under this convention the left-invariant field X^L = gX pairs as
kappa(a, X) and the right-invariant field X^R = Xg as kappa(a, Ad_{g^{-1}} X).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .rootsys import InvalidInput, Root, WeylWord, positive_roots

PIVOT_RTOL = 1e-10
NILPOTENT_TOL = 1e-12


class NotInCell(ValueError):
    """The point lies on (or numerically at) the boundary of the open cell."""


def killing_form(X, Y) -> complex:
    """Killing form 2n tr(XY) of sl_n."""
    X, Y = np.asarray(X), np.asarray(Y)
    if X.shape != Y.shape or X.ndim != 2:
        raise InvalidInput(f"rank mismatch: {X.shape} vs {Y.shape}")
    n = X.shape[0]
    # tr(XY) without forming the product
    return 2 * n * np.sum(X * Y.T)


def elementary(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


@dataclass(frozen=True, eq=False)
class ChevalleyFrame:
    """Basis of sl_n with 2 kappa(h_i, h_j) = delta_ij and kappa(e_a, e_-a) = 1.

    The flat basis is ordered ``cartan + raising + lowering`` with roots in
    the order of :func:`positive_roots`.
    """

    n: int
    roots: tuple[Root, ...]
    cartan: tuple[np.ndarray, ...]
    raising: dict
    lowering: dict

    @property
    def dim(self) -> int:
        return self.n * self.n - 1

    @property
    def rank(self) -> int:
        return self.n - 1

    @property
    def basis(self) -> np.ndarray:
        return _flat_basis(self)

    @property
    def gram(self) -> np.ndarray:
        return _gram(self)

    def index_of(self, root: Root) -> int:
        """Flat index of e_root (root may be negative)."""
        r = len(self.roots)
        if root.is_positive():
            return self.rank + self.roots.index(root)
        return self.rank + r + self.roots.index(-root)

    def coords(self, X) -> np.ndarray:
        """Coordinates c with X = sum_k c_k B_k (X traceless, 2-d or stacked)."""
        X = np.asarray(X)
        n = self.n
        flat = X.reshape(-1, n * n) if X.ndim > 2 else X.reshape(1, n * n)
        out = flat @ _coord_projector(self)
        return out.reshape(X.shape[:-2] + (self.dim,)) if X.ndim > 2 else out[0]

    def matrix(self, c) -> np.ndarray:
        """Inverse of :meth:`coords`."""
        return np.tensordot(np.asarray(c), self.basis, axes=(-1, 0))

    def covector_flat(self, a) -> np.ndarray:
        """Values kappa(a, B_k) of the covector with representative a."""
        return self.gram @ self.coords(a)

    def adjoint(self, g) -> np.ndarray:
        """Matrix of Ad_g in frame coordinates."""
        g = np.asarray(g)
        gi = np.linalg.inv(g)
        imgs = np.einsum("ij,kjl,lm->kim", g, self.basis, gi)
        return self.coords(imgs).T

    def ad(self, X) -> np.ndarray:
        """Matrix of ad_X in frame coordinates."""
        X = np.asarray(X)
        imgs = X @ self.basis - self.basis @ X
        return self.coords(imgs).T


@lru_cache(maxsize=None)
def chevalley_frame(n: int) -> ChevalleyFrame:
    if n < 2:
        raise InvalidInput(f"invalid rank n={n}")
    s = np.sqrt(2 * n)
    roots = positive_roots(n)
    raising, lowering = {}, {}
    for r in roots:
        i, j = r.pair()
        raising[r] = elementary(n, i, j) / s
        lowering[r] = elementary(n, j, i) / s
    hs: list[np.ndarray] = []
    for i in range(n - 1):
        h = elementary(n, i, i) - elementary(n, i + 1, i + 1)
        for q in hs:
            h = h - 2 * killing_form(h, q) * q
        h = h / np.sqrt(2 * killing_form(h, h).real)
        hs.append(h)
    return ChevalleyFrame(n, roots, tuple(hs), raising, lowering)


@lru_cache(maxsize=None)
def _flat_basis(fr: ChevalleyFrame) -> np.ndarray:
    mats = list(fr.cartan) + [fr.raising[r] for r in fr.roots] + [fr.lowering[r] for r in fr.roots]
    out = np.array(mats)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _gram(fr: ChevalleyFrame) -> np.ndarray:
    B = _flat_basis(fr)
    G = 2 * fr.n * np.einsum("aij,bji->ab", B, B)
    G.setflags(write=False)
    return G


@lru_cache(maxsize=None)
def _coord_projector(fr: ChevalleyFrame) -> np.ndarray:
    # least-squares left inverse of the vectorized basis
    B = _flat_basis(fr).reshape(fr.dim, -1)
    P = np.linalg.pinv(B)
    P.setflags(write=False)
    return P


def frame_residuals(n: int) -> tuple[float, float, float]:
    """Max deviations from 2k(h_i,h_j)=delta, k(e_a,e_-a)=1 and [h,e_a]=a(h)e_a."""
    fr = chevalley_frame(n)
    H = np.array(fr.cartan)
    cart = np.abs(2 * np.array([[killing_form(a, b) for b in H] for a in H]) - np.eye(n - 1)).max()
    pair = max(abs(killing_form(fr.raising[r], fr.lowering[r]) - 1) for r in fr.roots)
    brk = 0.0
    for r in fr.roots:
        e = fr.raising[r]
        i, j = r.pair()
        for h in H:
            brk = max(brk, np.abs(h @ e - e @ h - (h[i, i] - h[j, j]) * e).max())
    return float(cart), float(pair), float(brk)


def exp_nilpotent(X) -> np.ndarray:
    """exp of a nilpotent matrix as the finite sum of X^k / k!."""
    X = np.asarray(X, dtype=complex)
    n = X.shape[0]
    scale = max(1.0, np.abs(X).max())
    if np.abs(np.linalg.matrix_power(X, n)).max() > NILPOTENT_TOL * scale**n:
        raise InvalidInput("matrix is not nilpotent")
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, n):
        term = term @ X
        out = out + term / factorial(k)
    return out


@lru_cache(maxsize=None)
def _weyl_rep_cached(letters: tuple[int, ...], n: int) -> np.ndarray:
    out = np.eye(n, dtype=complex)
    for i in letters:
        up = np.eye(n, dtype=complex) + elementary(n, i - 1, i)
        lo = np.eye(n, dtype=complex) - elementary(n, i, i - 1)
        out = out @ (up @ lo @ up)
    out.setflags(write=False)
    return out


def weyl_representative(w: WeylWord, n: int) -> np.ndarray:
    """Tits representative prod s_i with s_i = exp(E_{i,i+1}) exp(-E_{i+1,i}) exp(E_{i,i+1})."""
    w.check_rank(n)
    return _weyl_rep_cached(w.letters, n).copy()


@dataclass(frozen=True)
class BruhatFactorization:
    u: np.ndarray
    d: np.ndarray
    l: np.ndarray

    def product(self) -> np.ndarray:
        return self.u @ self.d @ self.l


def bruhat_factorize(g) -> BruhatFactorization:
    """Factor g = u d l with u upper unitriangular, d diagonal, l lower unitriangular.

    Elimination runs from the bottom-right corner, so the pivots are ratios
    of lower-right principal minors.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    scale = np.abs(g).max()
    A = g.copy()
    u = np.eye(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        p = A[k, k]
        if abs(p) < PIVOT_RTOL * scale:
            raise NotInCell(f"pivot {k} vanishes (|p|={abs(p):.3g})")
        col = A[:k, k] / p
        u[:k, k] = col
        A[:k, :] -= np.outer(col, A[k, :])
    dvals = np.diag(A).copy()
    l = A / dvals[:, None]
    l[np.triu_indices(n, 1)] = 0.0
    return BruhatFactorization(u, np.diag(dvals), l)


def cell_margin(g) -> float:
    """Smallest relative pivot of the bottom-right elimination (0 off the cell)."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    scale = np.abs(g).max()
    A = g.copy()
    best = np.inf
    for k in range(n - 1, -1, -1):
        p = A[k, k]
        best = min(best, abs(p) / scale)
        if abs(p) == 0:
            return 0.0
        A[:k, :] -= np.outer(A[:k, k] / p, A[k, :])
    return float(best)


def _half_torus(dvals: np.ndarray) -> np.ndarray:
    s = np.sqrt(dvals.astype(complex))
    # principal roots may multiply to -1; move the sign to the last slot to stay in SL_n
    if abs(np.prod(s) + 1) < 1e-6:
        s[-1] = -s[-1]
    return s


def lambda_invert(g) -> tuple[np.ndarray, np.ndarray]:
    """Local section (b1, b2) of (b1, b2) -> b1 b2^{-1} over the open cell."""
    f = bruhat_factorize(g)
    s = _half_torus(np.diag(f.d))
    b1 = f.u * s[None, :]
    b2 = np.linalg.inv(f.l) / s[None, :]
    return b1, b2


def lambda_map(b1, b2) -> np.ndarray:
    return np.asarray(b1) @ np.linalg.inv(b2)


def alpha_form(g, xi, v) -> complex:
    """The 1-form alpha_xi at g on the tangent v: kappa(xi, b2^{-1} (g^{-1} v) b2)."""
    _, b2 = lambda_invert(g)
    X = np.linalg.solve(np.asarray(g), np.asarray(v))
    return killing_form(xi, np.linalg.solve(b2, X @ b2))


def alpha_rep(g, xi) -> np.ndarray:
    """Representative a of alpha_xi at g, i.e. kappa(a, X) = alpha_xi(gX)."""
    _, b2 = lambda_invert(g)
    return b2 @ np.asarray(xi) @ np.linalg.inv(b2)


def borel_pair_basis(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Basis of b x_t bbar: (h, -h), (e_a, 0), (0, e_-a)."""
    fr = chevalley_frame(n)
    z = np.zeros((n, n), dtype=complex)
    out = [(h, -h) for h in fr.cartan]
    out += [(fr.raising[r], z) for r in fr.roots]
    out += [(z, fr.lowering[r]) for r in fr.roots]
    return out


def moment_form_rep(g, xi) -> np.ndarray:
    """Representative of the right-trivialized form alpha'_xi at g.

    alpha'_xi is determined by alpha'_xi(Y1 g - g Y2) = kappa(xi, Y1 - Y2)
    for (Y1, Y2) in b x_t bbar. It needs no square-root branch; the
    infinitesimal conjugation action satisfies rho(xi) = MOMENT_SIGN *
    pi0^#(alpha'_xi).
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    fr = chevalley_frame(n)
    gi = np.linalg.inv(g)
    pairs = borel_pair_basis(n)
    # kappa(a, g^{-1} Y1 g - Y2) = kappa(xi, Y1 - Y2)
    tang = np.array([gi @ y1 @ g - y2 for y1, y2 in pairs])
    M = fr.coords(tang) @ fr.gram  # row p: covector flat-pairing with a's coords
    rhs = np.array([killing_form(xi, y1 - y2) for y1, y2 in pairs])
    try:
        c = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise NotInCell("moment form undefined off the open cell") from exc
    return fr.matrix(c)


# The infinitesimal action rho(xi) = xi^L - xi^R equals MOMENT_SIGN times the
# pi-sharp of the moment form; the value was calibrated on SL_2.
MOMENT_SIGN = -1


def sl_random(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    return m / np.linalg.det(m) ** (1.0 / n)


def sample_group(rng: np.random.Generator, n: int, margin: float = 1e-3) -> np.ndarray:
    """Seeded sample of SL_n in the open cell, at least ``margin`` from its boundary."""
    while True:
        g = sl_random(rng, n)
        if cell_margin(g) >= margin:
            return g


def sample_algebra(rng: np.random.Generator, n: int) -> np.ndarray:
    fr = chevalley_frame(n)
    c = rng.uniform(-1, 1, fr.dim) + 1j * rng.uniform(-1, 1, fr.dim)
    return fr.matrix(c)


def is_group_element(g, tol: float = 1e-10) -> bool:
    g = np.asarray(g)
    return g.ndim == 2 and g.shape[0] == g.shape[1] and abs(np.linalg.det(g) - 1) < tol


def matrix_to_doc(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"n": int(m.shape[0]), "entries": [[float(z.real), float(z.imag)] for z in m.ravel()]}


def matrix_from_doc(doc: dict, key: str = "entries") -> np.ndarray:
    try:
        n = int(doc["n"])
        vals = [complex(re, im) for re, im in doc[key]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed matrix document: {exc}") from exc
    if len(vals) != n * n:
        raise InvalidInput(f"expected {n * n} entries, got {len(vals)}")
    return np.array(vals, dtype=complex).reshape(n, n)


def load_matrix(path: str) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_doc(json.load(fh))


def weyl_permutation_matrix(w: WeylWord, n: int) -> np.ndarray:
    """Plain permutation matrix of w (no signs)."""
    p = w.permutation(n)
    P = np.zeros((n, n))
    for k, pk in enumerate(p):
        P[pk, k] = 1
    return P


def root_value(root: Root, h) -> complex:
    """alpha(h) for a diagonal h."""
    i, j = root.pair()
    return h[i, i] - h[j, j]


def random_dual_tangent(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Random (Y1, Y2) in b x_t bbar: Y1 upper, Y2 lower, opposite diagonals."""
    Z = rng.uniform(-1, 1, (2, n, n)) + 1j * rng.uniform(-1, 1, (2, n, n))
    t = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    t = t - t.mean()
    Y1 = np.triu(Z[0], 1) + np.diag(t)
    Y2 = np.tril(Z[1], -1) - np.diag(t)
    return Y1, Y2


def alpha_pullback_residual(b1, b2, xi, Y1, Y2) -> float:
    """|alpha_xi(lambda_* (b1 Y1, b2 Y2)) - (kappa(xi, Y1) - kappa(xi, Y2))|.

    The section through (b1, b2) must be the one returned by lambda_invert,
    so callers sample b1, b2 as ``lambda_invert(g)``.
    """
    b1, b2 = np.asarray(b1), np.asarray(b2)
    g = b1 @ np.linalg.inv(b2)
    v = b1 @ (Y1 - Y2) @ np.linalg.inv(b2)
    lhs = alpha_form(g, xi, v)
    rhs = killing_form(xi, Y1) - killing_form(xi, Y2)
    return float(abs(lhs - rhs) / max(1.0, abs(rhs)))
