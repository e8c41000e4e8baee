"""Slodowy slices in sl_n and classical Whittaker reduction.

Everything is expressed in the coordinates of the Chevalley frame of sl_n
(see :mod:`whittaker.liegroup`). Covectors use the flat convention of
:mod:`whittaker.doubles`: the covector with representative a has values
``gram @ coords(a)``, and a bivector P pairs flat covectors as f_a^T P f_b.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, expm_frechet

from ._linalg import null_space, numerical_rank, orth, singular_values
from .dirac import dirac_pullback, graph_of_bivector, kernel_and_classify
from .liegroup import ChevalleyFrame, chevalley_frame, killing_form
from .rootsys import InvalidInput

TRIPLE_TOL = 1e-12
OMEGA_RTOL = 1e-8
NEWTON_MAXITER = 50


class SolverDivergence(ValueError):
    """Newton did not bring Ad_{exp n}(s) onto the target."""


def parse_partition(partition) -> tuple[int, ...]:
    """Normalize a partition given as a sequence or a comma separated string."""
    if isinstance(partition, str):
        try:
            parts = [int(p) for p in partition.replace(" ", "").split(",") if p]
        except ValueError as exc:
            raise InvalidInput(f"malformed partition {partition!r}") from exc
    else:
        parts = [int(p) for p in partition]
    if not parts or any(p <= 0 for p in parts):
        raise InvalidInput(f"invalid partition {partition!r}")
    if sum(parts) < 2:
        raise InvalidInput("partition must be of n >= 2")
    return tuple(sorted(parts, reverse=True))


@dataclass(frozen=True, eq=False)
class NilpotentData:
    partition: tuple[int, ...]
    f: np.ndarray
    h: np.ndarray
    e: np.ndarray

    @property
    def n(self) -> int:
        return sum(self.partition)

    def residuals(self) -> tuple[float, float, float]:
        """Deviations of [h,e] = 2e, [h,f] = -2f, [e,f] = h."""
        f, h, e = self.f, self.h, self.e
        br = lambda x, y: x @ y - y @ x
        return (
            float(np.abs(br(h, e) - 2 * e).max()),
            float(np.abs(br(h, f) + 2 * f).max()),
            float(np.abs(br(e, f) - h).max()),
        )


def jordan_triple(partition) -> NilpotentData:
    """Standard sl_2-triple with f in lower Jordan form of the given type."""
    parts = parse_partition(partition)
    n = sum(parts)
    f = np.zeros((n, n), dtype=complex)
    h = np.zeros((n, n), dtype=complex)
    e = np.zeros((n, n), dtype=complex)
    start = 0
    for k in parts:
        for i in range(k):
            h[start + i, start + i] = k - 1 - 2 * i
        for i in range(1, k):
            f[start + i, start + i - 1] = 1.0
            e[start + i - 1, start + i] = i * (k - i)
        start += k
    return NilpotentData(parts, f, h, e)


def jordan_type(X, tol: float = 1e-9) -> tuple[int, ...]:
    """Jordan type of a nilpotent matrix from the ranks of its powers."""
    X = np.asarray(X)
    n = X.shape[0]
    ranks = [n]
    P = np.eye(n, dtype=complex)
    while ranks[-1] > 0:
        P = P @ X
        ranks.append(numerical_rank(P, atol=tol))
        if len(ranks) > n + 1:
            raise InvalidInput("matrix is not nilpotent")
    # number of blocks of size >= k is rank(X^{k-1}) - rank(X^k)
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    out = []
    for k, cnt in enumerate(at_least, start=1):
        nxt = at_least[k] if k < len(at_least) else 0
        out += [k] * (cnt - nxt)
    return tuple(sorted(out, reverse=True))


@dataclass(frozen=True, eq=False)
class SlodowyData:
    """Slice data; bases are columns of frame coordinates."""

    triple: NilpotentData
    centralizer_basis: np.ndarray
    grading: dict
    ell_basis: np.ndarray | None = None
    n_basis: np.ndarray | None = None
    n_perp_basis: np.ndarray | None = None
    omega_singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def frame(self) -> ChevalleyFrame:
        return chevalley_frame(self.triple.n)

    @property
    def slice_origin(self) -> np.ndarray:
        return self.triple.f

    @property
    def dim_slice(self) -> int:
        return self.centralizer_basis.shape[1]

    def slice_point(self, s_coords) -> np.ndarray:
        """f + sum_i s_i z_i as a matrix."""
        s_coords = np.asarray(s_coords, dtype=complex)
        return self.triple.f + self.frame.matrix(self.centralizer_basis @ s_coords)

    def n_element(self, n_coords) -> np.ndarray:
        return self.frame.matrix(self.n_basis @ np.asarray(n_coords, dtype=complex))


def _grade_of_basis(fr: ChevalleyFrame, h: np.ndarray) -> np.ndarray:
    """ad_h eigenvalue of each frame element (exact integers from the diagonal of h)."""
    hd = np.rint(np.diag(h).real).astype(int)
    grades = [0] * fr.rank
    for r in fr.roots:
        i, j = r.pair()
        grades.append(int(hd[i] - hd[j]))
    for r in fr.roots:
        i, j = r.pair()
        grades.append(int(hd[j] - hd[i]))
    return np.array(grades)


def centralizer_and_grading(data: NilpotentData) -> SlodowyData:
    fr = chevalley_frame(data.n)
    Z = null_space(fr.ad(data.e))
    grades = _grade_of_basis(fr, data.h)
    eye = np.eye(fr.dim)
    grading = {int(k): eye[:, grades == k] for k in sorted(set(grades.tolist()))}
    return SlodowyData(data, Z, grading)


def omega_matrix(data: SlodowyData, X: np.ndarray) -> np.ndarray:
    """Gram matrix of omega(x, y) = kappa(f, [x, y]) on the columns of X."""
    fr = data.frame
    mats = fr.matrix(X.T)
    f = data.triple.f
    k = len(mats)
    W = np.zeros((k, k), dtype=complex)
    for a in range(k):
        for b in range(a + 1, k):
            W[a, b] = killing_form(f, mats[a] @ mats[b] - mats[b] @ mats[a])
            W[b, a] = -W[a, b]
    return W


def _symplectic_gs(W: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Greedy symplectic Gram-Schmidt on the columns of B; returns the isotropic half."""
    form = lambda x, y: x @ W @ y
    cols = [B[:, i].copy() for i in range(B.shape[1])]
    ell = []
    while cols:
        v = cols.pop(0)
        pair = [abs(form(v, w)) for w in cols]
        if not pair or max(pair) < 1e-12:
            raise InvalidInput("omega is degenerate on the degree one subspace")
        j = int(np.argmax(pair))
        w = cols.pop(j)
        w = w / form(v, w)
        # make the rest omega-orthogonal to span(v, w)
        cols = [u - form(u, w) * v + form(u, v) * w for u in cols]
        ell.append(v)
    return np.array(ell).T


def lagrangian_and_n(data, seed: int | None = None) -> SlodowyData:
    """Complete the slice data with a Lagrangian l in g_(1), n and n^perp.

    With ``seed=None`` the greedy construction runs on the frame basis of
    g_(1) in order; an integer seed runs it on a seeded random basis instead.
    """
    sd = centralizer_and_grading(data) if isinstance(data, NilpotentData) else data
    fr = sd.frame
    g1 = sd.grading.get(1, np.zeros((fr.dim, 0)))
    if g1.shape[1]:
        W = omega_matrix(sd, g1)
        sv = singular_values(W)
        if sv[-1] <= OMEGA_RTOL * sv[0]:
            raise InvalidInput("omega is degenerate on the degree one subspace")
        B = np.eye(g1.shape[1], dtype=complex)
        if seed is not None:
            rng = np.random.default_rng(seed)
            k = g1.shape[1]
            B = rng.uniform(-1, 1, (k, k)) + 1j * rng.uniform(-1, 1, (k, k))
        ell = g1 @ _symplectic_gs(W, B)
    else:
        sv = np.zeros(0)
        ell = np.zeros((fr.dim, 0), dtype=complex)
    higher = [sd.grading[k] for k in sd.grading if k >= 2]
    N = np.hstack([ell] + higher) if higher else ell
    Nperp = null_space(N.T @ fr.gram)
    return SlodowyData(sd.triple, sd.centralizer_basis, sd.grading, ell, N, Nperp, sv)


def slodowy_data(partition, seed: int | None = None) -> SlodowyData:
    return lagrangian_and_n(jordan_triple(partition), seed)


def omega_isotropy(sd: SlodowyData) -> float:
    if sd.ell_basis.shape[1] == 0:
        return 0.0
    return float(np.abs(omega_matrix(sd, sd.ell_basis)).max())


def affine_residual(sd: SlodowyData, x) -> float:
    """Distance of x from f + n^perp, measured by kappa(x - f, n)."""
    fr = sd.frame
    if sd.n_basis.shape[1] == 0:
        return 0.0
    vals = sd.n_basis.T @ fr.gram @ fr.coords(np.asarray(x) - sd.triple.f)
    return float(np.abs(vals).max())


def orbit_dimension(X) -> int:
    X = np.asarray(X)
    return numerical_rank(chevalley_frame(X.shape[0]).ad(X), atol=1e-10)


# Gan-Ginzburg map (n, s) -> Ad_{exp n}(s)


def adjoint_action_map(sd: SlodowyData, n_coords, s_coords) -> np.ndarray:
    g = expm(sd.n_element(n_coords))
    return g @ sd.slice_point(s_coords) @ np.linalg.inv(g)


def adjoint_action_jacobian(sd: SlodowyData, n_coords, s_coords) -> tuple[np.ndarray, np.ndarray]:
    """(value, Jacobian) with columns in frame coordinates; n-columns first."""
    fr = sd.frame
    Nm = sd.n_element(n_coords)
    s = sd.slice_point(s_coords)
    g = expm(Nm)
    gi = np.linalg.inv(g)
    val = g @ s @ gi
    cols = []
    for k in range(sd.n_basis.shape[1]):
        _, L = expm_frechet(Nm, fr.matrix(sd.n_basis[:, k]))
        # d(g s g^{-1}) = L s g^{-1} - g s g^{-1} L g^{-1}
        cols.append(fr.coords(L @ s @ gi - val @ L @ gi))
    for k in range(sd.dim_slice):
        cols.append(fr.coords(g @ fr.matrix(sd.centralizer_basis[:, k]) @ gi))
    J = np.array(cols).T if cols else np.zeros((fr.dim, 0))
    return val, J


@dataclass
class ClassicalSolve:
    n_coords: np.ndarray
    s_coords: np.ndarray
    slice_point: np.ndarray
    residual: float
    iterations: int


def project_to_slice(sd: SlodowyData, x) -> np.ndarray:
    """Least-squares coordinates of x - f along the centralizer."""
    fr = sd.frame
    return np.linalg.lstsq(sd.centralizer_basis, fr.coords(np.asarray(x) - sd.triple.f), rcond=None)[0]


def classical_transversality_solve(sd: SlodowyData, x, tol: float = 1e-10) -> ClassicalSolve:
    """Solve Ad_{exp n}(s) = x for n in the algebra n and s in the slice.

    Newton from (0, projection of x onto f + g^e).
    """
    fr = sd.frame
    x = np.asarray(x, dtype=complex)
    scale = max(1.0, float(np.abs(x).max()))
    if affine_residual(sd, x) > 1e-10 * scale:
        raise InvalidInput("point is not in f + n^perp")
    k = sd.n_basis.shape[1]
    th = np.concatenate([np.zeros(k, dtype=complex), project_to_slice(sd, x)])
    target = fr.coords(x)
    res = np.inf
    it = 0
    for it in range(1, NEWTON_MAXITER + 1):
        val, J = adjoint_action_jacobian(sd, th[:k], th[k:])
        r = fr.coords(val) - target
        res = float(np.abs(val - x).max())
        if res < 1e-3 * tol * scale:
            break
        th = th - np.linalg.lstsq(J, r, rcond=None)[0]
    val = adjoint_action_map(sd, th[:k], th[k:])
    res = float(np.abs(val - x).max())
    if not res < tol * scale:
        raise SolverDivergence(f"Newton failed; residual {res:.3e}")
    return ClassicalSolve(th[:k], th[k:], sd.slice_point(th[k:]), res, it)


# Lie-Poisson structure


def lie_poisson_eval(x, a, b) -> complex:
    """kappa(x, [a, b]) for gradients a, b given by kappa-duality."""
    a, b = np.asarray(a), np.asarray(b)
    return killing_form(x, a @ b - b @ a)


def lie_poisson_matrix(x) -> np.ndarray:
    """Bivector P at x with f_a^T P f_b = kappa(x, [a, b]) on flat covectors."""
    x = np.asarray(x)
    fr = chevalley_frame(x.shape[0])
    Ginv = np.linalg.inv(fr.gram)
    # sharp of the covector a is [x, a]
    return (fr.ad(x) @ Ginv).T


def lie_poisson_sharp_image(x) -> np.ndarray:
    return orth(lie_poisson_matrix(x).T, atol=1e-10)


@dataclass
class SlodowyReduced:
    bivector: np.ndarray | None
    kernel_dim: int
    rank: int
    findings: list


def slodowy_reduced_bivector(sd: SlodowyData, s) -> SlodowyReduced:
    """Dirac pullback of the Lie-Poisson graph along T_s S = g^e.

    The bivector is on covectors written in the centralizer basis.
    """
    P = lie_poisson_matrix(s)
    LS = dirac_pullback(sd.centralizer_basis, graph_of_bivector(P.T))
    cls = kernel_and_classify(LS)
    if cls.kernel_dim:
        return SlodowyReduced(None, cls.kernel_dim, -1, [{"kind": "nontrivial-kernel", "kernel_dim": cls.kernel_dim}])
    B = cls.bivector.T
    return SlodowyReduced(B, 0, numerical_rank(B, atol=1e-9), [])


def whittaker_lift(sd: SlodowyData, s, df, extension=None) -> np.ndarray:
    """Flat covector at s on g that is N-invariant along f + n^perp and restricts to df.

    On T_s(f + n^perp) = [n, s] + g^e it kills [n, s] and equals df on g^e;
    ``extension`` adds a combination of the annihilator of n^perp.
    """
    fr = sd.frame
    s = np.asarray(s)
    orbit = fr.ad(s) @ sd.n_basis  # [s, n] columns
    M = np.hstack([orbit, sd.centralizer_basis])
    rhs = np.concatenate([np.zeros(orbit.shape[1]), np.asarray(df, dtype=complex)])
    F = np.linalg.lstsq(M.T, rhs, rcond=None)[0]
    if extension is not None and sd.n_basis.shape[1]:
        F = F + fr.gram @ sd.n_basis @ np.asarray(extension)
    return F


def whittaker_bracket(sd: SlodowyData, s, df, dg, extension_seed: int | None = None) -> complex:
    ext_f = ext_g = None
    if extension_seed is not None:
        rng = np.random.default_rng(extension_seed)
        k = sd.n_basis.shape[1]
        ext_f = rng.uniform(-1, 1, k) + 1j * rng.uniform(-1, 1, k)
        ext_g = rng.uniform(-1, 1, k) + 1j * rng.uniform(-1, 1, k)
    F = whittaker_lift(sd, s, df, ext_f)
    G = whittaker_lift(sd, s, dg, ext_g)
    return complex(F @ lie_poisson_matrix(s) @ G)


def random_slice_coords(rng, sd: SlodowyData, scale: float = 1.0) -> np.ndarray:
    k = sd.dim_slice
    return scale * (rng.uniform(-1, 1, k) + 1j * rng.uniform(-1, 1, k))


def random_n_coords(rng, sd: SlodowyData, scale: float = 1.0) -> np.ndarray:
    k = sd.n_basis.shape[1]
    return scale * (rng.uniform(-1, 1, k) + 1j * rng.uniform(-1, 1, k))


def partitions(n: int):
    """All partitions of n in decreasing order."""

    def rec(rest, cap):
        if rest == 0:
            yield ()
            return
        for p in range(min(rest, cap), 0, -1):
            for tail in rec(rest - p, p):
                yield (p,) + tail

    return list(rec(n, n))
