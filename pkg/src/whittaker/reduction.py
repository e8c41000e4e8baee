"""Reduction along multiplicative slices, computed pointwise.

A Hamiltonian space carries a Poisson bivector, a G-valued moment map and
the infinitesimal action rho_M. The reduced structure on mu^{-1}(Sigma)
is obtained two ways: as the Dirac pullback of the graph of the bivector,
and by evaluating the bivector on lifts of differentials that are
invariant under rho_M(u) and rho_M(c).

All tangent vectors are in flat left-trivialized frame coordinates (see
:mod:`whittaker.doubles`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ._linalg import (
    containment_residual,
    intersection,
    null_space,
    numerical_rank,
    orth,
    singular_values,
)
from .dirac import LagrangianSubspace, dirac_pullback, graph_of_bivector, kernel_and_classify
from .doubles import PUSH_SCALE, moment_residual, pi0_matrix, pid_matrix, quotient_differential
from .liegroup import ChevalleyFrame, cell_margin, chevalley_frame, sl_random
from .rootsys import InvalidInput, WeylWord, coxeter_word
from .slices import (
    SlicePoint,
    SliceSpec,
    _chain_jacobian,
    _Const,
    _Expm,
    _left_trivialize,
    _sigma_chain,
    build_slice_spec,
    omega_jacobian,
    omega_param,
    sigma_jacobian,
    sigma_param,
    split_u_c,
    tangent_omega,
    InconsistentPoint,
    transversality_solve,
)


class NotOnSlice(ValueError):
    pass


class DegeneratePoint(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HamiltonianSpace:
    """G with pi0 and conjugation ("GSelf"), or G x G with the Heisenberg structure.

    For ``"HeisenbergDouble"`` the bivector is PUSH_SCALE * pi_D^+, G acts by
    left multiplication on both factors, and mu(d1, d2) = d1 d2^{-1}.
    """

    kind: str
    n: int
    spec: SliceSpec

    def __post_init__(self):
        if self.kind not in ("GSelf", "HeisenbergDouble"):
            raise InvalidInput(f"unknown Hamiltonian space {self.kind!r}")

    @property
    def frame(self) -> ChevalleyFrame:
        return chevalley_frame(self.n)

    @property
    def is_double(self) -> bool:
        return self.kind == "HeisenbergDouble"

    @property
    def dim(self) -> int:
        N = self.frame.dim
        return 2 * N if self.is_double else N

    def gram(self) -> np.ndarray:
        G = self.frame.gram
        return sla.block_diag(G, G) if self.is_double else np.array(G)

    def bivector(self, m) -> np.ndarray:
        if self.is_double:
            return PUSH_SCALE * pid_matrix(1, m)
        return pi0_matrix(m)

    def moment(self, m) -> np.ndarray:
        if self.is_double:
            return np.asarray(m[0]) @ np.linalg.inv(m[1])
        return np.asarray(m)

    def moment_differential(self, m) -> np.ndarray:
        if self.is_double:
            return quotient_differential(m, self.frame)
        return np.eye(self.frame.dim)

    def action_coords(self, m, xi) -> np.ndarray:
        fr = self.frame
        if self.is_double:
            return np.concatenate(
                [fr.coords(-np.linalg.solve(m[0], xi @ m[0])), fr.coords(-np.linalg.solve(m[1], xi @ m[1]))]
            )
        g = np.asarray(m)
        return fr.coords(xi - np.linalg.solve(g, xi @ g))

    def action_matrix(self, m) -> np.ndarray:
        """Columns rho_M(B_k) over the frame."""
        return np.array([self.action_coords(m, B) for B in self.frame.basis]).T

    def random_point(self, rng, margin: float = 1e-3):
        while True:
            m = (sl_random(rng, self.n), sl_random(rng, self.n)) if self.is_double else sl_random(rng, self.n)
            if cell_margin(self.moment(m)) >= margin:
                return m

    def point_over(self, g, rng=None, base=None):
        """A point m with mu(m) = g (base or a random second factor on the double)."""
        g = np.asarray(g, dtype=complex)
        if not self.is_double:
            return g
        d2 = base if base is not None else sl_random(rng, self.n)
        return (g @ d2, d2)

    def validate(self, samples: int = 10, seed: int = 0, tol: float = 1e-8) -> float:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            m = self.random_point(rng)
            worst = max(worst, max(moment_residual(self, m, B) for B in self.frame.basis))
        if worst >= tol:
            raise InvalidInput(f"moment condition fails (residual {worst:.3e})")
        return worst


def make_space(kind: str, n: int, word: WeylWord | None = None, validate: bool = True) -> HamiltonianSpace:
    word = coxeter_word(n) if word is None else word
    space = HamiltonianSpace(kind, n, build_slice_spec(word, n))
    if validate:
        space.validate()
    return space


# charts on mu^{-1}(Sigma)


@dataclass(frozen=True, eq=False)
class SliceChart:
    """Coordinates on mu^{-1}(Sigma^o): slice coordinates, plus exp-coordinates of d2 on the double."""

    space: HamiltonianSpace
    component: int
    base: np.ndarray | None = None

    @property
    def dim(self) -> int:
        s = self.space.spec.dim_sigma
        return s + self.space.frame.dim if self.space.is_double else s

    def _chains(self):
        sp = self.space.spec
        chain = _sigma_chain(sp, self.component, open_cell=True)
        if not self.space.is_double:
            return chain, None
        fr = self.space.frame
        N = fr.dim
        s = sp.dim_sigma
        idx = list(range(s, s + N))
        tail = [_Const(self.base), _Expm(list(fr.basis), idx)]
        return chain + tail, tail

    def point(self, x):
        c1, c2 = self._chains()
        x = np.asarray(x, dtype=complex)
        g, _ = _chain_jacobian(c1, x, self.dim)
        if c2 is None:
            return g
        d2, _ = _chain_jacobian(c2, x, self.dim)
        return (g, d2)

    def tangent(self, x) -> np.ndarray:
        """Flat M-coordinates of the coordinate vector fields (columns)."""
        fr = self.space.frame
        c1, c2 = self._chains()
        x = np.asarray(x, dtype=complex)
        g, J = _chain_jacobian(c1, x, self.dim)
        T1 = _left_trivialize(fr, g, J)
        if c2 is None:
            return T1
        d2, J2 = _chain_jacobian(c2, x, self.dim)
        return np.vstack([T1, _left_trivialize(fr, d2, J2)])


def chart_at(space: HamiltonianSpace, p: SlicePoint, rng=None, base=None):
    """(chart, coordinates) for the point over sigma_param(p)."""
    if space.is_double:
        base = base if base is not None else sl_random(rng, space.n)
        chart = SliceChart(space, p.component_index, base)
        x = np.concatenate([p.flat(), np.zeros(space.frame.dim)])
    else:
        chart = SliceChart(space, p.component_index)
        x = p.flat()
    return chart, x


# tangent spaces


def locate_on_slice(space: HamiltonianSpace, m, tol: float = 1e-9) -> SlicePoint:
    """Slice point of mu(m), raising NotOnSlice if mu(m) is not in Sigma."""
    res = transversality_solve(space.spec, space.moment(m))
    if np.abs(res.u_coords).max(initial=0.0) > tol:
        raise NotOnSlice(f"mu(m) is off the slice: |u| = {np.abs(res.u_coords).max():.3e}")
    return res.point


def preimage_tangent(space: HamiltonianSpace, m, p: SlicePoint | None = None) -> np.ndarray:
    """Orthonormal basis of T_m mu^{-1}(Sigma)."""
    p = locate_on_slice(space, m) if p is None else p
    TS = orth(sigma_jacobian(space.spec, p))
    comp = null_space(TS.conj().T)  # Hermitian complement of T Sigma in T G
    Dmu = space.moment_differential(m)
    basis = null_space(comp.conj().T @ Dmu)
    expected = space.dim - (space.frame.dim - space.spec.dim_sigma)
    if basis.shape[1] != expected:
        raise DegeneratePoint(f"preimage tangent has dim {basis.shape[1]}, expected {expected}")
    return basis


def transversality_rank(space: HamiltonianSpace, m, p: SlicePoint) -> int:
    """rank of dmu(T_m M) + T Sigma inside T G (full rank means transverse)."""
    TS = sigma_jacobian(space.spec, p)
    return numerical_rank(np.hstack([space.moment_differential(m), TS]))


@dataclass
class ReducedPoint:
    m: object
    tangent_S: np.ndarray
    dirac: LagrangianSubspace
    kernel_dim: int
    bivector: np.ndarray | None  # P_S with pi_S(b, c) = b^T P_S c in tangent_S coordinates
    singular_values: np.ndarray
    findings: list = field(default_factory=list)


def reduced_dirac(space: HamiltonianSpace, m, basis: np.ndarray | None = None) -> ReducedPoint:
    """Dirac pullback of the graph of the bivector to mu^{-1}(Sigma) at m."""
    Phi = preimage_tangent(space, m) if basis is None else basis
    P = space.bivector(m)
    L = graph_of_bivector(P.T)
    LS = dirac_pullback(Phi, L)
    cls = kernel_and_classify(LS)
    findings = []
    biv = None
    if cls.kernel_dim:
        findings.append({"kind": "not-poisson-dirac-point", "kernel_dim": cls.kernel_dim})
    else:
        biv = cls.bivector.T
    sv = singular_values(LS.covector_part)
    return ReducedPoint(m, Phi, LS, cls.kernel_dim, biv, sv, findings)


def leaf_rank_report(space: HamiltonianSpace, m, rp: ReducedPoint | None = None) -> tuple[int, int]:
    rp = reduced_dirac(space, m) if rp is None else rp
    rank = numerical_rank(rp.bivector, atol=1e-9) if rp.bivector is not None else -1
    # absolute floor: the bivector can vanish identically at slice points
    image = orth(space.bivector(m).T, atol=1e-9)
    dim_int = intersection(rp.tangent_S, image).shape[1]
    return rank, dim_int


# characteristic distribution and the sharp decomposition


@dataclass
class CharacteristicReport:
    basis: np.ndarray
    dim: int
    dim_u: int
    residual_u: float  # containment of the intersection in rho_M(u)
    residual_uc: float  # containment of pi^#(T_S^o) in rho_M(u + c)


def omega_annihilator(space: HamiltonianSpace, u_coords, p: SlicePoint) -> tuple[np.ndarray, np.ndarray]:
    """(tangent basis, annihilator representatives) of Omega at omega_param(u, p).

    The tangent comes from the Jacobian of omega_param.
    """
    spec, fr = space.spec, space.frame
    T = orth(omega_jacobian(spec, u_coords, p))
    K = null_space(T.T @ fr.gram)
    return T, K


def characteristic_distribution(space: HamiltonianSpace, m, u_coords, p: SlicePoint) -> CharacteristicReport:
    """pi^#(T_S^o) cap T_S for S = mu^{-1}(Omega), with mu(m) = omega_param(u, p)."""
    spec, fr = space.spec, space.frame
    TO, K = omega_annihilator(space, u_coords, p)
    Dmu = space.moment_differential(m)
    ann = Dmu.T @ (fr.gram @ K)  # flat covectors of mu^* T_Omega^o
    S = space.bivector(m).T @ ann
    comp = null_space(TO.conj().T)
    TS = null_space(comp.conj().T @ Dmu)
    I = intersection(S, TS)
    R = space.action_matrix(m)
    res_u = containment_residual(I, R @ spec.u_basis())
    res_uc = containment_residual(S, R @ np.hstack([spec.u_basis(), spec.c_basis()]))
    return CharacteristicReport(I, I.shape[1], spec.dim_u, res_u, res_uc)


@dataclass
class SharpReport:
    annihilator_membership: float
    containment: float
    formula_printed: float
    formula_derived: float
    span_mismatch: float  # distance between span{gX, Xg} and the Jacobian tangent (inf if dims differ)
    char_dim: int
    char_residual: float


def sharp_decomposition(spec: SliceSpec, u_coords, p: SlicePoint) -> SharpReport:
    """Check the description of pi0^#(T_Omega^o) at g = omega_param(u, p).

    Each annihilating covector x has left representative a = n1 + c1 and
    right representative Ad_g a = n2 + c2 with n_i in u and c_i in c. The
    printed identity pi0^#(x) = (rho(-c1) + rho(c2))/2 + rho(-n1) and the
    identity (rho(-c1) + rho(-c2))/2 + rho(-n1) that follows from the
    derivation are both evaluated.
    """
    from ._linalg import subspace_distance

    fr = spec.frame
    space = HamiltonianSpace("GSelf", spec.n, spec)
    g = omega_param(spec, u_coords, p)
    T, K = omega_annihilator(space, u_coords, p)
    try:
        span_err = subspace_distance(tangent_omega(spec, g), T)
    except InconsistentPoint:
        span_err = float("inf")
    A = fr.adjoint(g)
    Ainv = fr.adjoint(np.linalg.inv(g))
    UC = np.hstack([spec.u_basis(), spec.c_basis()])
    memb = max(containment_residual(K, UC), containment_residual(A @ K, UC))
    S = pi0_matrix(g).T @ (fr.gram @ K)

    def rho(X):
        return X - Ainv @ X

    cont = containment_residual(S, rho(UC))
    printed = derived = 0.0
    scale = max(1.0, np.abs(S).max(initial=0.0))
    for j in range(K.shape[1]):
        a = K[:, j]
        n1, c1, _ = split_u_c(spec, a)
        n2, c2, _ = split_u_c(spec, A @ a)
        lhs = S[:, j]
        printed = max(printed, np.abs(lhs - (0.5 * (rho(-c1) + rho(c2)) + rho(-n1))).max() / scale)
        derived = max(derived, np.abs(lhs - (0.5 * (rho(-c1) + rho(-c2)) + rho(-n1))).max() / scale)
    I = intersection(S, T)
    char_res = containment_residual(I, rho(spec.u_basis()))
    return SharpReport(memb, cont, printed, derived, span_err, I.shape[1], char_res)


# lifts and brackets


def _kappa_complement(space: HamiltonianSpace, B: np.ndarray) -> np.ndarray:
    W = null_space(B.T @ space.gram())
    if numerical_rank(np.hstack([B, W])) == space.dim:
        return W
    # kappa-isotropic overlap: fall back to the Hermitian complement
    return null_space(B.conj().T)


def complement(space: HamiltonianSpace, m, Phi: np.ndarray, seed: int = 0) -> np.ndarray:
    """Complement W of T mu^{-1}(Omega) + rho_M(c) in T_m M.

    Seed 0 gives the kappa-orthogonal complement; other seeds shear it by a
    seeded random map into the subspace.
    """
    spec = space.spec
    R = space.action_matrix(m)
    B = np.hstack([Phi, R @ spec.u_basis(), R @ spec.c_basis()])
    W = _kappa_complement(space, B)
    if seed and W.shape[1]:
        rng = np.random.default_rng(seed)
        X = rng.uniform(-1, 1, (B.shape[1], W.shape[1])) + 1j * rng.uniform(-1, 1, (B.shape[1], W.shape[1]))
        W = W + B @ X
    return W


def lift_differential(space: HamiltonianSpace, m, df, Phi: np.ndarray, complement_seed: int = 0) -> np.ndarray:
    """Flat covector dF on T_m M that equals df on Phi and kills rho_M(u), rho_M(c) and W."""
    spec = space.spec
    R = space.action_matrix(m)
    W = complement(space, m, Phi, complement_seed)
    M = np.hstack([Phi, R @ spec.u_basis(), R @ spec.c_basis(), W])
    if M.shape[1] != space.dim or numerical_rank(M) < space.dim:
        raise DegeneratePoint("tangent decomposition is rank deficient")
    rhs = np.zeros(space.dim, dtype=complex)
    rhs[: Phi.shape[1]] = df
    return np.linalg.solve(M.T, rhs)


@dataclass
class BracketReport:
    value: complex
    complement_spread: float
    dirac_value: complex
    residual: float


def bracket_via_lifts(
    space: HamiltonianSpace, m, df, dg, Phi: np.ndarray, rp: ReducedPoint | None = None, complements: int = 5
) -> BracketReport:
    P = space.bivector(m)
    vals = []
    for s in range(complements):
        dF = lift_differential(space, m, df, Phi, s)
        dG = lift_differential(space, m, dg, Phi, s)
        vals.append(complex(dF @ P @ dG))
    rp = reduced_dirac(space, m, Phi) if rp is None else rp
    dv = complex(np.asarray(df) @ rp.bivector @ np.asarray(dg)) if rp.bivector is not None else np.nan
    spread = max(abs(v - vals[0]) for v in vals)
    return BracketReport(vals[0], float(spread), dv, float(abs(vals[0] - dv)))


def charpoly_differentials(g, fr: ChevalleyFrame) -> tuple[np.ndarray, np.ndarray]:
    """Char-poly coefficients c_1..c_{n-1} of g and their flat differentials (rows).

    Built from power sums p_k = tr g^k, with d p_k(gX) = k tr(g^k X), through
    Newton's identities.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    N = fr.dim
    powers = [np.eye(n, dtype=complex)]
    for _ in range(n):
        powers.append(powers[-1] @ g)
    p = np.array([np.trace(powers[k]) for k in range(n + 1)])
    dp = np.zeros((n + 1, N), dtype=complex)
    for k in range(1, n + 1):
        dp[k] = k * np.einsum("ij,aji->a", powers[k], fr.basis)
    e = np.zeros(n + 1, dtype=complex)
    de = np.zeros((n + 1, N), dtype=complex)
    e[0] = 1.0
    for k in range(1, n + 1):
        acc = 0.0
        dacc = np.zeros(N, dtype=complex)
        for i in range(1, k + 1):
            sgn = (-1) ** (i - 1)
            acc = acc + sgn * e[k - i] * p[i]
            dacc = dacc + sgn * (de[k - i] * p[i] + e[k - i] * dp[i])
        e[k] = acc / k
        de[k] = dacc / k
    signs = np.array([(-1) ** k for k in range(n + 1)])
    c = signs * e
    dc = signs[:, None] * de
    return c[1:n], dc[1:n]


def casimir_differentials(space: HamiltonianSpace, m) -> np.ndarray:
    """Flat differentials on M of the pulled-back char-poly coefficients (rows)."""
    _, dc = charpoly_differentials(space.moment(m), space.frame)
    return dc @ space.moment_differential(m)


def reduced_bivector_at(chart: SliceChart, x) -> np.ndarray:
    m = chart.point(x)
    rp = reduced_dirac(chart.space, m, chart.tangent(x))
    if rp.bivector is None:
        raise DegeneratePoint("reduced structure has a kernel")
    return rp.bivector


def reduced_jacobiator(chart: SliceChart, x, step: float = 1e-6) -> float:
    """Cyclic sum {x_i,{x_j,x_k}} + cyclic for chart coordinates, by central differences."""
    x = np.asarray(x, dtype=complex)
    P = reduced_bivector_at(chart, x)
    d = P.shape[0]
    dP = np.zeros((d, d, d), dtype=complex)
    for l in range(d):
        e = np.zeros(d)
        e[l] = step
        dP[l] = (reduced_bivector_at(chart, x + e) - reduced_bivector_at(chart, x - e)) / (2 * step)
    T = np.einsum("il,ljk->ijk", P, dP)
    J = T + np.transpose(T, (1, 2, 0)) + np.transpose(T, (2, 0, 1))
    return float(np.abs(J).max())


def omega_point(space: HamiltonianSpace, u_coords, p: SlicePoint, rng=None, base=None):
    g = omega_param(space.spec, u_coords, p)
    return space.point_over(g, rng, base)


def sigma_point(space: HamiltonianSpace, p: SlicePoint, rng=None, base=None):
    return space.point_over(sigma_param(space.spec, p), rng, base)
