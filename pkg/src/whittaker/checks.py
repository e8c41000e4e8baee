"""Property suites behind ``whittaker verify``.

Each suite evaluates one residual per sample. Sample i draws from its own
generator seeded by (seed, i), so results do not depend on evaluation
order. A sample whose residual reaches the tolerance, or that raises a
numerical error, becomes a finding carrying the offending point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import classical as cl
from ._linalg import numerical_rank
from .doubles import (
    cocycle_residual,
    dressing_residuals,
    jacobiator,
    lambda_poisson_residual,
    moment_residual,
    multiplicativity_residual,
    pi0_brackets,
    pi0_matrix,
    pid_brackets,
    pid_matrix,
)
from .liegroup import (
    alpha_pullback_residual,
    chevalley_frame,
    lambda_invert,
    matrix_to_doc,
    random_dual_tangent,
    sample_algebra,
    sample_group,
    sl_random,
)
from .reduction import (
    bracket_via_lifts,
    casimir_differentials,
    characteristic_distribution,
    chart_at,
    leaf_rank_report,
    make_space,
    omega_point,
    reduced_dirac,
    sharp_decomposition,
)
from .rootsys import InvalidInput, WeylWord, coxeter_word
from .slices import (
    build_slice_spec,
    charpoly_distance,
    companion_oracle,
    omega_param,
    random_slice_point,
    random_u_coords,
    sigma_param,
    transversality_solve,
)

MANIFOLDS = {"g": "GSelf", "double": "HeisenbergDouble"}


@dataclass
class CheckRequest:
    check: str
    n: int = 2
    word: WeylWord | None = None
    manifold: str = "g"
    samples: int | None = None
    seed: int = 0
    tol: float | None = None
    partition: tuple[int, ...] | None = None
    formula: str = "derived"

    def resolved(self) -> "CheckRequest":
        """Fill defaults and validate; raises InvalidInput on a bad request."""
        if self.check not in SUITES:
            raise InvalidInput(f"unknown check {self.check!r}")
        suite = SUITES[self.check]
        if self.n < 2:
            raise InvalidInput(f"invalid rank n={self.n}")
        word = coxeter_word(self.n) if self.word is None else self.word
        word.check_rank(self.n)
        if self.manifold not in MANIFOLDS:
            raise InvalidInput(f"unknown manifold {self.manifold!r}")
        samples = suite.samples if self.samples is None else int(self.samples)
        tol = suite.tol if self.tol is None else float(self.tol)
        if samples <= 0:
            raise InvalidInput("samples must be positive")
        if not tol > 0:
            raise InvalidInput("tol must be positive")
        if self.formula not in ("derived", "printed"):
            raise InvalidInput(f"unknown formula {self.formula!r}")
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidInput("seed must be a 64-bit unsigned integer")
        partition = cl.parse_partition(self.partition) if self.partition is not None else (self.n,)
        if sum(partition) != self.n:
            raise InvalidInput(f"partition {partition} is not a partition of {self.n}")
        return CheckRequest(self.check, self.n, word, self.manifold, samples, self.seed, tol, partition, self.formula)


@dataclass
class SampleResult:
    residual: float
    point: dict = field(default_factory=dict)
    dims: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    problem: str | None = None  # a structural failure that is not a residual


@dataclass(frozen=True)
class Suite:
    run: Callable
    tol: float
    samples: int


def _pair_doc(d) -> dict:
    return {"d1": matrix_to_doc(d[0]), "d2": matrix_to_doc(d[1])}


def _point_doc(space, m) -> dict:
    return _pair_doc(m) if space.is_double else {"g": matrix_to_doc(m)}


# suites; each takes (request, context, rng) and returns a SampleResult


def _jacobi_pi0(req, ctx, rng):
    g = sample_group(rng, req.n)
    res = jacobiator(pi0_matrix, g, ctx["frame"], bracket_fn=pi0_brackets)
    return SampleResult(res, {"g": matrix_to_doc(g)})


def _jacobi_pid_plus(req, ctx, rng):
    d = (sl_random(rng, req.n), sl_random(rng, req.n))
    res = jacobiator(lambda p: pid_matrix(1, p), d, ctx["frame"], bracket_fn=lambda p: pid_brackets(1, p))
    return SampleResult(res, _pair_doc(d))


def _multiplicativity(req, ctx, rng):
    g = (sl_random(rng, req.n), sl_random(rng, req.n))
    h = (sl_random(rng, req.n), sl_random(rng, req.n))
    return SampleResult(multiplicativity_residual(g, h), {"g": _pair_doc(g), "h": _pair_doc(h)})


def _lambda_poisson(req, ctx, rng):
    b1, b2 = lambda_invert(sample_group(rng, req.n))
    tang, comp = dressing_residuals(b1, b2, sample_algebra(rng, req.n))
    res = max(lambda_poisson_residual(b1, b2), tang, comp)
    return SampleResult(res, {"b1": matrix_to_doc(b1), "b2": matrix_to_doc(b2)})


def _alpha_form(req, ctx, rng):
    b1, b2 = lambda_invert(sample_group(rng, req.n))
    res = 0.0
    for xi in ctx["frame"].basis[:10]:
        Y1, Y2 = random_dual_tangent(rng, req.n)
        res = max(res, alpha_pullback_residual(b1, b2, xi, Y1, Y2))
    return SampleResult(res, {"b1": matrix_to_doc(b1), "b2": matrix_to_doc(b2)})


def _cocycle(req, ctx, rng):
    x, y = sample_algebra(rng, req.n), sample_algebra(rng, req.n)
    return SampleResult(cocycle_residual(x, y, ctx["frame"]), {"x": matrix_to_doc(x), "y": matrix_to_doc(y)})


def _moment(kind):
    def run(req, ctx, rng):
        space = ctx[kind]
        m = space.random_point(rng)
        res = max(moment_residual(space, m, B) for B in space.frame.basis)
        return SampleResult(res, _point_doc(space, m))

    return run


def _prop_sharp(req, ctx, rng):
    spec = ctx["spec"]
    u, p = random_u_coords(spec, rng), random_slice_point(spec, rng)
    rep = sharp_decomposition(spec, u, p)
    formula = rep.formula_derived if req.formula == "derived" else rep.formula_printed
    res = max(rep.annihilator_membership, rep.containment, formula)
    extras = {
        "annihilator_membership": rep.annihilator_membership,
        "containment": rep.containment,
        "formula_printed": rep.formula_printed,
        "formula_derived": rep.formula_derived,
    }
    return SampleResult(res, {"u": _vec(u), "slice_point": p.to_doc()}, extras=extras)


def _char_dist(req, ctx, rng):
    space = ctx["space"]
    spec = space.spec
    u, p = random_u_coords(spec, rng), random_slice_point(spec, rng)
    m = omega_point(space, u, p, rng)
    ch = characteristic_distribution(space, m, u, p)
    problem = None if ch.dim <= ch.dim_u else f"characteristic distribution has dim {ch.dim} > dim u = {ch.dim_u}"
    res = max(ch.residual_u, ch.residual_uc)
    return SampleResult(res, _point_doc(space, m), {"char_dim": ch.dim}, problem=problem)


def _transversality(req, ctx, rng):
    spec = ctx["spec"]
    u, p = random_u_coords(spec, rng), random_slice_point(spec, rng)
    g = omega_param(spec, u, p)
    doc = {"g": matrix_to_doc(g)}
    sol = transversality_solve(spec, g, seed=int(rng.integers(2**32)))
    back = omega_param(spec, sol.u_coords, sol.point)
    res = float(np.abs(back - g).max() / max(1.0, np.abs(g).max()))
    return SampleResult(res, doc, extras={"iterations": sol.iterations})


def _companion(req, ctx, rng):
    spec = ctx["spec"]
    u, p = random_u_coords(spec, rng), random_slice_point(spec, rng)
    g = omega_param(spec, u, p)
    sol = transversality_solve(spec, g, seed=int(rng.integers(2**32)))
    oracle = companion_oracle(req.n, g, sol.point.component_index)
    s_newton = sigma_param(spec, sol.point)
    s_oracle = sigma_param(spec, oracle)
    res = max(charpoly_distance(s_newton, s_oracle), charpoly_distance(g, s_oracle))
    return SampleResult(res, {"g": matrix_to_doc(g)})


def _bracket_consistency(req, ctx, rng):
    space = ctx["space"]
    p = random_slice_point(space.spec, rng)
    chart, x = chart_at(space, p, rng)
    m, Phi = chart.point(x), chart.tangent(x)
    rp = reduced_dirac(space, m, Phi)
    doc = _point_doc(space, m)
    if rp.bivector is None:
        return SampleResult(0.0, doc, problem="reduced structure has a kernel")
    df, dg = rng.normal(size=Phi.shape[1]), rng.normal(size=Phi.shape[1])
    br = bracket_via_lifts(space, m, df, dg, Phi, rp)
    C = Phi.T @ casimir_differentials(space, m).T
    cas = 0.0
    for i in range(C.shape[1]):
        for j in range(C.shape[1]):
            cas = max(cas, abs(bracket_via_lifts(space, m, C[:, i], C[:, j], Phi, rp).value))
    res = max(br.complement_spread, br.residual, cas)
    extras = {"complement_spread": br.complement_spread, "dirac_residual": br.residual, "casimir": cas}
    return SampleResult(res, doc, extras=extras)


def _clean_dirac(req, ctx, rng):
    space = ctx["space"]
    p = random_slice_point(space.spec, rng)
    chart, x = chart_at(space, p, rng)
    m, Phi = chart.point(x), chart.tangent(x)
    rp = reduced_dirac(space, m, Phi)
    doc = _point_doc(space, m)
    dims = {"kernel": rp.kernel_dim}
    if rp.kernel_dim:
        return SampleResult(0.0, doc, dims, problem=f"pullback has kernel of dim {rp.kernel_dim}")
    rank, dim_int = leaf_rank_report(space, m, rp)
    dims.update(rank=rank, intersection=dim_int)
    res = max(rp.dirac.isotropy_residual(), float(np.abs(rp.bivector + rp.bivector.T).max()))
    problem = None if rank == dim_int else f"reduced rank {rank} != leaf intersection dim {dim_int}"
    return SampleResult(res, doc, dims, problem=problem)


def _leaf_rank(req, ctx, rng):
    """Reduced rank at solver-generated slice points against the brute-force intersection."""
    space = ctx["space"]
    spec = space.spec
    u, p = random_u_coords(spec, rng), random_slice_point(spec, rng)
    g = omega_param(spec, u, p)
    sol = transversality_solve(spec, g, seed=int(rng.integers(2**32)))
    chart, x = chart_at(space, sol.point, rng)
    m, Phi = chart.point(x), chart.tangent(x)
    rp = reduced_dirac(space, m, Phi)
    doc = _point_doc(space, m)
    if rp.kernel_dim:
        return SampleResult(0.0, doc, {"kernel": rp.kernel_dim}, problem="reduced structure has a kernel")
    rank, dim_int = leaf_rank_report(space, m, rp)
    problem = None if rank == dim_int else f"reduced rank {rank} != brute-force rank {dim_int}"
    return SampleResult(sol.residual, doc, {"rank": rank, "oracle_rank": dim_int}, problem=problem)


def _classical_transversality(req, ctx, rng):
    sd = ctx["slodowy"]
    nc, sc = cl.random_n_coords(rng, sd), cl.random_slice_coords(rng, sd)
    x = cl.adjoint_action_map(sd, nc, sc)
    doc = {"x": matrix_to_doc(x)}
    sol = cl.classical_transversality_solve(sd, x)
    _, J = cl.adjoint_action_jacobian(sd, nc, sc)
    jac_rank = numerical_rank(J)
    res = max(sol.residual, float(np.abs(sol.s_coords - sc).max(initial=0.0)))
    problem = None if jac_rank == J.shape[1] else f"Jacobian rank {jac_rank} < {J.shape[1]}"
    return SampleResult(res, doc, {"jacobian_rank": jac_rank}, problem=problem)


def _classical_reduction(req, ctx, rng):
    sd, sd2 = ctx["slodowy"], ctx["slodowy_alt"]
    s = sd.slice_point(cl.random_slice_coords(rng, sd))
    doc = {"s": matrix_to_doc(s)}
    red = cl.slodowy_reduced_bivector(sd, s)
    if red.bivector is None:
        return SampleResult(0.0, doc, {"kernel": red.kernel_dim}, problem="reduced structure has a kernel")
    k = sd.dim_slice
    df, dg = rng.normal(size=k), rng.normal(size=k)
    target = df @ red.bivector @ dg
    res = 0.0
    for data in (sd, sd2):
        for ext in (None, int(rng.integers(2**32))):
            res = max(res, abs(cl.whittaker_bracket(data, s, df, dg, ext) - target))
    return SampleResult(float(res), doc, {"rank": red.rank})


def _vec(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _setup(req) -> dict:
    ctx = {"frame": chevalley_frame(req.n)}
    if req.check in ("prop-sharp", "transversality", "companion"):
        ctx["spec"] = build_slice_spec(req.word, req.n)
    if req.check == "companion" and req.word.letters != coxeter_word(req.n).letters:
        raise InvalidInput("the companion oracle needs the Coxeter word")
    if req.check in ("char-dist", "bracket-consistency", "clean-dirac", "leaf-rank"):
        ctx["space"] = make_space(MANIFOLDS[req.manifold], req.n, req.word, validate=False)
    if req.check == "moment-g":
        ctx["GSelf"] = make_space("GSelf", req.n, validate=False)
    if req.check == "moment-double":
        ctx["HeisenbergDouble"] = make_space("HeisenbergDouble", req.n, validate=False)
    if req.check.startswith("classical"):
        ctx["slodowy"] = cl.slodowy_data(req.partition)
        ctx["slodowy_alt"] = cl.slodowy_data(req.partition, seed=1)
    return ctx


SUITES: dict[str, Suite] = {
    "jacobi-pi0": Suite(_jacobi_pi0, 1e-5, 50),
    "jacobi-pid-plus": Suite(_jacobi_pid_plus, 1e-5, 50),
    "multiplicativity": Suite(_multiplicativity, 1e-9, 100),
    "lambda-poisson": Suite(_lambda_poisson, 1e-9, 100),
    "alpha-form": Suite(_alpha_form, 1e-9, 100),
    "cocycle": Suite(_cocycle, 1e-10, 100),
    "moment-g": Suite(_moment("GSelf"), 1e-8, 100),
    "moment-double": Suite(_moment("HeisenbergDouble"), 1e-8, 100),
    "prop-sharp": Suite(_prop_sharp, 1e-8, 100),
    "char-dist": Suite(_char_dist, 1e-8, 100),
    "transversality": Suite(_transversality, 1e-9, 100),
    "companion": Suite(_companion, 1e-9, 100),
    "bracket-consistency": Suite(_bracket_consistency, 1e-7, 50),
    "clean-dirac": Suite(_clean_dirac, 1e-9, 50),
    "leaf-rank": Suite(_leaf_rank, 1e-9, 50),
    "classical-transversality": Suite(_classical_transversality, 1e-10, 100),
    "classical-reduction": Suite(_classical_reduction, 1e-7, 50),
}

CHECK_IDS = tuple(SUITES)


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def run_check(request: CheckRequest) -> dict:
    """Run one suite and return the report as a plain dict."""
    t0 = time.perf_counter()
    req = request.resolved()
    suite = SUITES[req.check]
    ctx = _setup(req)
    results = []
    for i in range(req.samples):
        rng = sample_rng(req.seed, i)
        try:
            r = suite.run(req, ctx, rng)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            r = SampleResult(float("inf"), problem=f"{type(exc).__name__}: {exc}")
        results.append(r)
    return aggregate(req, results, (time.perf_counter() - t0) * 1e3)


def aggregate(req: CheckRequest, results: list, runtime_ms: float) -> dict:
    """Combine per-sample results (max of residuals, findings ordered by sample index)."""
    findings = []
    worst = 0.0
    dims: dict = {}
    extras: dict = {}
    for i, r in enumerate(results):
        worst = max(worst, r.residual)
        for k, v in r.dims.items():
            dims.setdefault(k, set()).add(int(v))
        for k, v in r.extras.items():
            extras[k] = max(extras.get(k, 0.0), float(v))
        if r.problem is not None or not r.residual < req.tol:
            findings.append(
                {
                    "sample": i,
                    "kind": "structure" if r.problem else "residual",
                    "message": r.problem or f"residual {r.residual:.3e} >= tol",
                    "residual": r.residual,
                    "point": r.point,
                    "dims": dict(r.dims),
                }
            )
    dims_out = context_dims(req)
    for k, vals in dims.items():
        vals = sorted(vals)
        dims_out[k] = vals[0] if len(vals) == 1 else vals
    return {
        "check": req.check,
        "group": f"A{req.n - 1}",
        "word": " ".join(map(str, req.word.letters)),
        "manifold": req.manifold,
        "samples": req.samples,
        "seed": req.seed,
        "tol": req.tol,
        "max_residual": worst,
        "dims": dims_out,
        "extras": extras,
        "findings": findings,
        "pass": bool(worst < req.tol and not findings),
        "runtime_ms": runtime_ms,
    }


def context_dims(req: CheckRequest) -> dict:
    if req.check.startswith("classical"):
        sd = cl.slodowy_data(req.partition)
        return {"slice": sd.dim_slice, "n": sd.n_basis.shape[1], "ell": sd.ell_basis.shape[1]}
    if req.check in ("jacobi-pi0", "jacobi-pid-plus", "multiplicativity", "lambda-poisson", "alpha-form", "cocycle"):
        return {"g": req.n * req.n - 1}
    return dict(build_slice_spec(req.word, req.n).dims())
