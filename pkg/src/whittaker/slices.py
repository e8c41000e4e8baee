"""Multiplicative slices Sigma = U_w Z w and their conjugation sweeps Omega = U Z w U.

Root subgroups use unscaled elementary matrices, so the coordinate x on
the root eps_i - eps_j gives the factor I + x E_ij. Products over roots run
in height-then-lexicographic order. Sigma points are

    (prod_{flipped} (I + x_a E_a)) . z . wdot . c_k

with z either the matrix exponential of an element of Lie(Z) or, on the
open part, the factorized form u_Z . exp(torus) . ubar_Z.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct

import numpy as np
import scipy.linalg as sla
import sympy

from ._linalg import orth
from .liegroup import (
    ChevalleyFrame,
    NotInCell,
    bruhat_factorize,
    chevalley_frame,
    elementary,
    weyl_representative,
)
from .rootsys import (
    CartanSplit,
    InvalidInput,
    Root,
    RootPartition,
    WeylWord,
    cartan_split,
    coweight_to_eps,
    coxeter_word,
    root_partition,
    torus_component_group,
)

NEWTON_MAXITER = 100
NEWTON_STEP_TOL = 1e-12


class NotInOmega(ValueError):
    """The Newton solver found no preimage in Omega."""


class InconsistentPoint(ValueError):
    """A tangent computation returned the wrong dimension."""


class OracleInapplicable(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SliceSpec:
    word: WeylWord
    n: int
    partition: RootPartition
    split: CartanSplit
    wdot: np.ndarray
    frame: ChevalleyFrame
    component_reps: tuple[np.ndarray, ...]
    component_labels: tuple[tuple[int, ...], ...]
    torus_generators: tuple[np.ndarray, ...]  # diagonal entries of t^w basis vectors

    @property
    def fixed(self) -> tuple[Root, ...]:
        return self.partition.fixed

    @property
    def moved(self) -> tuple[Root, ...]:
        return self.partition.moved

    @property
    def flipped(self) -> tuple[Root, ...]:
        return self.partition.flipped

    @property
    def dim_z(self) -> int:
        return self.split.dim_t_w + 2 * len(self.fixed)

    @property
    def dim_sigma(self) -> int:
        return len(self.flipped) + self.dim_z

    @property
    def dim_omega(self) -> int:
        return len(self.moved) + self.dim_sigma

    @property
    def dim_c(self) -> int:
        return self.split.dim_c

    @property
    def dim_u(self) -> int:
        return len(self.moved)

    @property
    def n_components(self) -> int:
        return len(self.component_reps)

    def dims(self) -> dict:
        return {
            "sigma": self.dim_sigma,
            "omega": self.dim_omega,
            "c": self.dim_c,
            "u": self.dim_u,
            "z": self.dim_z,
            "t_w": self.split.dim_t_w,
            "components": self.n_components,
        }

    # Lie algebra pieces in frame coordinates (columns)

    def u_basis(self) -> np.ndarray:
        fr = self.frame
        return np.eye(fr.dim)[:, [fr.index_of(r) for r in self.moved]]

    def z_basis(self) -> np.ndarray:
        fr = self.frame
        cols = [fr.coords(np.diag(h).astype(complex)) for h in self.torus_generators]
        I = np.eye(fr.dim)
        cols += [I[:, fr.index_of(r)] for r in self.fixed]
        cols += [I[:, fr.index_of(-r)] for r in self.fixed]
        return np.array(cols, dtype=complex).T.reshape(fr.dim, len(cols))

    def c_basis(self) -> np.ndarray:
        fr = self.frame
        cols = [fr.coords(np.diag(_diag_of(v, self.n)).astype(complex)) for v in self.split.c_basis]
        return np.array(cols, dtype=complex).T.reshape(fr.dim, len(cols))


def _diag_of(coweight_vec, n) -> np.ndarray:
    return np.array([float(x) for x in coweight_to_eps(coweight_vec, n)])


@lru_cache(maxsize=None)
def _build(word: tuple[int, ...], n: int) -> SliceSpec:
    w = WeylWord(word)
    part = root_partition(w, n)
    split = cartan_split(w, n)
    comp = torus_component_group(w, n)
    reps, labels = [], []
    for k in iproduct(*[range(d) for d in comp.divisors]):
        y = [Fraction(0)] * n
        for kj, gen in zip(k, comp.generators):
            y = [a + kj * b for a, b in zip(y, gen)]
        reps.append(np.diag(np.exp(2j * np.pi * np.array([float(a) for a in y]))))
        labels.append(tuple(k))
    gens = tuple(_diag_of(v, n) for v in split.t_w_basis)
    return SliceSpec(
        word=w,
        n=n,
        partition=part,
        split=split,
        wdot=weyl_representative(w, n),
        frame=chevalley_frame(n),
        component_reps=tuple(reps),
        component_labels=tuple(labels),
        torus_generators=gens,
    )


def build_slice_spec(word: WeylWord, n: int) -> SliceSpec:
    word.check_rank(n)
    return _build(word.letters, n)


@dataclass(frozen=True, eq=False)
class SlicePoint:
    uw_coords: np.ndarray
    z_torus_coords: np.ndarray
    z_unip_coords: np.ndarray  # +fixed roots, then -fixed roots
    component_index: int = 0

    def flat(self) -> np.ndarray:
        return np.concatenate([self.uw_coords, self.z_torus_coords, self.z_unip_coords]).astype(complex)

    @classmethod
    def from_flat(cls, spec: SliceSpec, theta, component_index: int = 0) -> "SlicePoint":
        theta = np.asarray(theta, dtype=complex)
        a = len(spec.flipped)
        b = a + spec.split.dim_t_w
        return cls(theta[:a].copy(), theta[a:b].copy(), theta[b:].copy(), int(component_index))

    @classmethod
    def zero(cls, spec: SliceSpec, component_index: int = 0) -> "SlicePoint":
        return cls.from_flat(spec, np.zeros(spec.dim_sigma), component_index)

    def to_doc(self) -> dict:
        def enc(v):
            return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]

        return {
            "uw_coords": enc(self.uw_coords),
            "z_torus_coords": enc(self.z_torus_coords),
            "z_unip_coords": enc(self.z_unip_coords),
            "component_index": int(self.component_index),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SlicePoint":
        def dec(v):
            return np.array([complex(a, b) for a, b in v], dtype=complex)

        try:
            return cls(
                dec(doc["uw_coords"]),
                dec(doc.get("z_torus_coords", [])),
                dec(doc.get("z_unip_coords", [])),
                int(doc.get("component_index", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed slice point: {exc}") from exc


# factor chains: each factor maps the coordinate vector to a matrix, with derivatives


class _Unip:
    def __init__(self, E, idx, sign=1.0):
        self.E, self.idx, self.sign = E, idx, sign

    def value(self, th):
        return np.eye(self.E.shape[0], dtype=complex) + self.sign * th[self.idx] * self.E

    def derivs(self, th):
        return [(self.idx, self.sign * self.E)]


class _Torus:
    def __init__(self, gens, idxs):
        self.gens, self.idxs = gens, idxs

    def value(self, th):
        d = sum((th[i] * g for g, i in zip(self.gens, self.idxs)), np.zeros(len(self.gens[0]), dtype=complex))
        return np.diag(np.exp(d))

    def derivs(self, th):
        T = self.value(th)
        return [(i, np.diag(g) @ T) for g, i in zip(self.gens, self.idxs)]


class _Expm:
    def __init__(self, mats, idxs):
        self.mats, self.idxs = mats, idxs

    def _X(self, th):
        return sum((th[i] * M for M, i in zip(self.mats, self.idxs)), np.zeros_like(self.mats[0]))

    def value(self, th):
        return sla.expm(self._X(th))

    def derivs(self, th):
        X = self._X(th)
        return [(i, sla.expm_frechet(X, M, compute_expm=False)) for M, i in zip(self.mats, self.idxs)]


class _Const:
    def __init__(self, M):
        self.M = M

    def value(self, th):
        return self.M

    def derivs(self, th):
        return []


def _chain_value(chain, th):
    out = np.eye(chain[0].value(th).shape[0], dtype=complex)
    for f in chain:
        out = out @ f.value(th)
    return out


def _chain_jacobian(chain, th, dim):
    vals = [f.value(th) for f in chain]
    n = vals[0].shape[0]
    pre = [np.eye(n, dtype=complex)]
    for v in vals:
        pre.append(pre[-1] @ v)
    suf = [np.eye(n, dtype=complex)]
    for v in reversed(vals):
        suf.append(v @ suf[-1])
    suf = suf[::-1]
    J = np.zeros((n, n, dim), dtype=complex)
    for k, f in enumerate(chain):
        for i, dF in f.derivs(th):
            J[:, :, i] += pre[k] @ dF @ suf[k + 1]
    return pre[-1], J


def _root_matrix(r: Root, n: int) -> np.ndarray:
    i, j = r.pair()
    return elementary(n, i, j)


def _sigma_chain(spec: SliceSpec, component: int, open_cell: bool, offset: int = 0):
    n = spec.n
    chain = []
    k = offset
    for r in spec.flipped:
        chain.append(_Unip(_root_matrix(r, n), k))
        k += 1
    ntor = spec.split.dim_t_w
    tor_idx = list(range(k, k + ntor))
    k += ntor
    nf = len(spec.fixed)
    pos_idx = list(range(k, k + nf))
    neg_idx = list(range(k + nf, k + 2 * nf))
    if open_cell:
        for r, i in zip(spec.fixed, pos_idx):
            chain.append(_Unip(_root_matrix(r, n), i))
        if ntor:
            chain.append(_Torus(spec.torus_generators, tor_idx))
        for r, i in zip(spec.fixed, neg_idx):
            chain.append(_Unip(_root_matrix(-r, n), i))
    elif ntor or nf:
        mats = [np.diag(g).astype(complex) for g in spec.torus_generators]
        mats += [_root_matrix(r, n) for r in spec.fixed] + [_root_matrix(-r, n) for r in spec.fixed]
        chain.append(_Expm(mats, tor_idx + pos_idx + neg_idx))
    chain.append(_Const(spec.wdot @ spec.component_reps[component]))
    return chain


def _omega_chain(spec: SliceSpec, component: int, open_cell: bool):
    n = spec.n
    m = len(spec.moved)
    left = [_Unip(_root_matrix(r, n), i) for i, r in enumerate(spec.moved)]
    right = [_Unip(_root_matrix(r, n), i, -1.0) for i, r in reversed(list(enumerate(spec.moved)))]
    return left + _sigma_chain(spec, component, open_cell, offset=m) + right


def _check_component(spec: SliceSpec, p: SlicePoint):
    if not 0 <= p.component_index < spec.n_components:
        raise InvalidInput(f"component index {p.component_index} out of range")


def sigma_param(spec: SliceSpec, p: SlicePoint, open_cell: bool = True) -> np.ndarray:
    _check_component(spec, p)
    return _chain_value(_sigma_chain(spec, p.component_index, open_cell), p.flat())


def unipotent_factor(spec: SliceSpec, u_coords) -> np.ndarray:
    n = spec.n
    out = np.eye(n, dtype=complex)
    for x, r in zip(np.asarray(u_coords, dtype=complex), spec.moved):
        out = out @ (np.eye(n) + x * _root_matrix(r, n))
    return out


def omega_param(spec: SliceSpec, u_coords, p: SlicePoint, open_cell: bool = True) -> np.ndarray:
    """u s u^{-1} with u the ordered product over moved roots and s = sigma_param(p)."""
    u = unipotent_factor(spec, u_coords)
    return u @ sigma_param(spec, p, open_cell) @ np.linalg.inv(u)


def sigma_jacobian(spec: SliceSpec, p: SlicePoint, open_cell: bool = True) -> np.ndarray:
    """Left-trivialized Jacobian (frame coords x dim Sigma) of sigma_param at p."""
    chain = _sigma_chain(spec, p.component_index, open_cell)
    g, J = _chain_jacobian(chain, p.flat(), spec.dim_sigma)
    return _left_trivialize(spec.frame, g, J)


def omega_jacobian(spec: SliceSpec, u_coords, p: SlicePoint, open_cell: bool = True) -> np.ndarray:
    chain = _omega_chain(spec, p.component_index, open_cell)
    th = np.concatenate([np.asarray(u_coords, dtype=complex), p.flat()])
    g, J = _chain_jacobian(chain, th, spec.dim_omega)
    return _left_trivialize(spec.frame, g, J)


def _left_trivialize(fr: ChevalleyFrame, g, J) -> np.ndarray:
    X = np.linalg.solve(g, J.reshape(fr.n, -1)).reshape(J.shape)
    return fr.coords(np.moveaxis(X, 2, 0)).T


def z_is_open(spec: SliceSpec, p: SlicePoint, margin: float = 1e-10) -> bool:
    """Whether the Z-component of the (exponential-chart) point is factorizable."""
    chain = _sigma_chain(spec, p.component_index, open_cell=False)
    zs = [f for f in chain if isinstance(f, _Expm)]
    if not zs:
        return True
    try:
        bruhat_factorize(zs[0].value(p.flat()))
    except NotInCell:
        return False
    return True


# tangent spaces of Omega


def tangent_omega(spec: SliceSpec, g) -> np.ndarray:
    """Orthonormal basis (left-trivialized frame coords) of span{gX, Xg : X in u + z}."""
    fr = spec.frame
    g = np.asarray(g, dtype=complex)
    B = np.hstack([spec.u_basis(), spec.z_basis()])
    A = fr.adjoint(np.linalg.inv(g))
    Q = orth(np.hstack([B, A @ B]))
    if Q.shape[1] != spec.dim_omega:
        raise InconsistentPoint(f"tangent span has dim {Q.shape[1]}, expected {spec.dim_omega}")
    return Q


def annihilator_omega(spec: SliceSpec, g) -> np.ndarray:
    """Covector representatives (frame coords, columns) annihilating T_g Omega.

    A covector with representative a kills the tangent with coordinates c
    iff (gram @ a) . c = 0.
    """
    fr = spec.frame
    T = tangent_omega(spec, g)
    from ._linalg import null_space

    K = null_space(T.T @ fr.gram)
    if K.shape[1] != fr.dim - spec.dim_omega:
        raise InconsistentPoint("annihilator has the wrong dimension")
    return K


def u_plus_c_basis(spec: SliceSpec) -> np.ndarray:
    return np.hstack([spec.u_basis(), spec.c_basis()])


def split_u_c(spec: SliceSpec, a) -> tuple[np.ndarray, np.ndarray, float]:
    """Write a = n + c with n in u, c in c; returns (n, c, residual)."""
    U, C = spec.u_basis(), spec.c_basis()
    M = np.hstack([U, C])
    coef, *_ = np.linalg.lstsq(M, a, rcond=None)
    nu = U @ coef[: U.shape[1]]
    cc = C @ coef[U.shape[1] :]
    res = np.abs(M @ coef - a).max() / max(1.0, np.abs(a).max())
    return nu, cc, float(res)


# transversality solver


@dataclass
class SolveResult:
    u_coords: np.ndarray
    point: SlicePoint
    residual: float
    iterations: int


def _newton(chain, g, theta0, dim, maxiter=NEWTON_MAXITER):
    th = np.array(theta0, dtype=complex)
    target = np.asarray(g, dtype=complex).ravel()
    val = _chain_value(chain, th).ravel()
    res = np.linalg.norm(val - target)
    it = 0
    for it in range(1, maxiter + 1):
        val, J = _chain_jacobian(chain, th, dim)
        r = val.ravel() - target
        res = np.linalg.norm(r)
        step = np.linalg.lstsq(J.reshape(-1, dim), -r, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            cand = th + t * step
            rc = np.linalg.norm(_chain_value(chain, cand).ravel() - target)
            if rc < res or rc < 1e-14:
                break
            t *= 0.5
        th = cand
        res = rc
        if np.linalg.norm(t * step) < NEWTON_STEP_TOL * max(1.0, np.linalg.norm(th)) or res < 1e-15:
            break
    return th, float(res), it


def transversality_solve(
    spec: SliceSpec,
    g,
    open_cell: bool = True,
    seeds: int = 4,
    seed: int = 0,
    tol: float = 1e-10,
) -> SolveResult:
    """Find (u, p) with omega_param(u, p) = g by damped Gauss-Newton.

    Every component is tried from the zero seed first, then from a few
    seeded random starts.
    """
    g = np.asarray(g, dtype=complex)
    dim = spec.dim_omega
    scale = max(1.0, np.abs(g).max())
    rng = np.random.default_rng(seed)
    starts = [np.zeros(dim, dtype=complex)]
    for _ in range(seeds):
        starts.append(0.5 * (rng.uniform(-1, 1, dim) + 1j * rng.uniform(-1, 1, dim)))
    best = None
    for th0 in starts:
        for k in range(spec.n_components):
            chain = _omega_chain(spec, k, open_cell)
            th, res, it = _newton(chain, g, th0, dim)
            if best is None or res < best[1]:
                best = (th, res, it, k)
            if res < tol * scale:
                m = spec.dim_u
                return SolveResult(th[:m], SlicePoint.from_flat(spec, th[m:], k), res, it)
    raise NotInOmega(f"Newton failed; best residual {best[1]:.3e}")


# companion-matrix oracle for Coxeter words


def _charpoly_coeffs(M) -> np.ndarray:
    return np.poly(np.asarray(M))


@lru_cache(maxsize=None)
def _companion_affine(n: int):
    """Exact affine map x -> char-poly coefficients of (I + sum x_a E_a) wdot.

    Returns integer arrays (A, b), leading coefficient first.
    """
    spec = build_slice_spec(coxeter_word(n), n)
    xs = sympy.symbols(f"x0:{len(spec.flipped)}")
    U = sympy.eye(n)
    for x, r in zip(xs, spec.flipped):
        i, j = r.pair()
        E = sympy.zeros(n, n)
        E[i, j] = 1
        U = U * (sympy.eye(n) + x * E)
    W = sympy.Matrix(np.rint(spec.wdot.real).astype(int).tolist())
    lam = sympy.Symbol("lam")
    poly = sympy.Poly((U * W).charpoly(lam).as_expr(), lam, *xs)
    coeffs = [sympy.Poly(c, *xs) for c in sympy.Poly(poly.as_expr(), lam).all_coeffs()]
    if any(c.total_degree() > 1 for c in coeffs):
        raise OracleInapplicable("characteristic polynomial is not affine in the slice coordinates")
    A = np.array([[int(c.coeff_monomial(x)) for x in xs] for c in coeffs], dtype=float)
    b = np.array([int(c.coeff_monomial(1)) for c in coeffs], dtype=float)
    return A, b


def companion_oracle(n: int, g, component: int = 0, sep_tol: float = 1e-8) -> SlicePoint:
    """Slice point on the Coxeter slice with the same characteristic polynomial as g.

    The characteristic polynomial of (I + sum x_a E_a) wdot is affine in x
    with integer coefficients (computed symbolically once); the central
    component representative zeta I rescales the k-th coefficient by
    zeta^k. The resulting square system is solved directly.
    """
    g = np.asarray(g, dtype=complex)
    ev = np.linalg.eigvals(g)
    gaps = np.abs(ev[:, None] - ev[None, :]) + np.diag(np.full(n, np.inf))
    if gaps.min() < sep_tol * max(1.0, np.abs(ev).max()):
        raise OracleInapplicable("eigenvalues are not separated")
    spec = build_slice_spec(coxeter_word(n), n)
    if not 0 <= component < spec.n_components:
        raise InvalidInput("component out of range")
    A, b = _companion_affine(n)
    zeta = spec.component_reps[component][0, 0]
    powers = zeta ** np.arange(n + 1)
    target = _charpoly_coeffs(g) / powers
    # coefficients 1..n-1 are free; the constant term is fixed by det = 1
    x = np.linalg.solve(A[1:n], target[1:n] - b[1:n])
    return SlicePoint(x, np.zeros(0, dtype=complex), np.zeros(0, dtype=complex), component)


def charpoly_distance(g, h) -> float:
    return float(np.abs(_charpoly_coeffs(g) - _charpoly_coeffs(h)).max())


# sampling


def random_slice_point(spec: SliceSpec, rng: np.random.Generator, scale: float = 1.0, component=None) -> SlicePoint:
    d = spec.dim_sigma
    th = scale * (rng.uniform(-1, 1, d) + 1j * rng.uniform(-1, 1, d))
    k = int(rng.integers(spec.n_components)) if component is None else component
    return SlicePoint.from_flat(spec, th, k)


def random_u_coords(spec: SliceSpec, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    m = spec.dim_u
    return scale * (rng.uniform(-1, 1, m) + 1j * rng.uniform(-1, 1, m))
