"""Command line driver: ``whittaker {info, verify, reduce, classical}``.

Reports are JSON documents with floats written to 17 significant digits.
Exit codes: 0 pass, 1 numerical failure, 2 usage or parse failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import classical as cl
from .checks import CHECK_IDS, MANIFOLDS, CheckRequest, run_check
from .liegroup import is_group_element, matrix_from_doc, matrix_to_doc
from .rootsys import InvalidInput, WeylWord, coxeter_word, root_partition, torus_component_group

CONFIG_ENV = "WHITTAKER_CONFIG"
CONFIG_KEYS = {"tol": float, "samples": int, "seed": int}

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# serialization


def _encode(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        txt = format(x, ".17g")
        return txt if any(c in txt for c in ".en") else txt + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return "[" + ", ".join(_encode(v) for v in items) + "]"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag])
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: dict) -> str:
    """Serialize a report; floats keep 17 significant digits."""
    return _encode(report) + "\n"


def _emit(report: dict, out: str | None):
    text = dumps_report(report)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# config


def read_config(path: str | None) -> dict:
    """Parse ``key = value`` lines ('#' starts a comment) into typed defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV)
        if not path or not os.path.exists(path):
            return {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}") from exc
    return out


def _merged(args, key):
    val = getattr(args, key, None)
    return args.config_values.get(key) if val is None else val


def _word(args) -> WeylWord:
    return coxeter_word(args.rank) if args.weyl is None else WeylWord.parse(args.weyl)


# commands


def cmd_info(args) -> int:
    n = args.rank
    word = _word(args)
    word.check_rank(n)
    from .slices import build_slice_spec

    spec = build_slice_spec(word, n)
    rp = root_partition(word, n)
    comps = torus_component_group(word, n)
    dims = spec.dims()
    print(f"group A{n - 1}, word {' '.join(map(str, word.letters)) or '(identity)'}")
    print(f"roots: fixed {len(rp.fixed)}, moved {len(rp.moved)}, flipped {len(rp.flipped)}")
    print(f"dimSigma={dims['sigma']} dimOmega={dims['omega']} dimC={dims['c']} components={dims['components']}")
    print(f"component group: {' x '.join(f'Z/{d}' for d in comps.divisors) or 'trivial'}")
    report = {
        "command": "info",
        "group": f"A{n - 1}",
        "word": " ".join(map(str, word.letters)),
        "roots": {"fixed": len(rp.fixed), "moved": len(rp.moved), "flipped": len(rp.flipped)},
        "dims": dims,
        "component_group": list(comps.divisors),
    }
    if args.out:
        _emit(report, args.out)
    return EXIT_PASS


def cmd_verify(args) -> int:
    req = CheckRequest(
        check=args.check,
        n=args.rank,
        word=None if args.weyl is None else WeylWord.parse(args.weyl),
        manifold=args.manifold,
        samples=_merged(args, "samples"),
        seed=_merged(args, "seed") or 0,
        tol=_merged(args, "tol"),
        partition=args.partition,
        formula=args.formula,
    )
    report = run_check(req)
    _emit(report, args.out)
    if args.out:
        status = "pass" if report["pass"] else "FAIL"
        print(f"{report['check']}: {status} max_residual={report['max_residual']:.3e}")
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def load_point(path: str, manifold: str):
    """Read a point file: {"n", "entries"} on G, or {"n", "d1", "d2"} on the double."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if manifold == "double":
            return (matrix_from_doc(doc, "d1"), matrix_from_doc(doc, "d2"))
        return matrix_from_doc(doc)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse point file {path}: {exc}") from exc


def cmd_reduce(args) -> int:
    from .reduction import (
        casimir_differentials,
        leaf_rank_report,
        make_space,
        preimage_tangent,
        reduced_dirac,
        sigma_point,
    )
    from .slices import NotInOmega, random_slice_point, transversality_solve

    t0 = time.perf_counter()
    n = args.rank
    word = _word(args)
    space = make_space(MANIFOLDS[args.manifold], n, word, validate=False)
    if args.point:
        m = load_point(args.point, args.manifold)
        parts = m if space.is_double else (m,)
        if any(x.shape != (n, n) for x in parts):
            raise UsageError(f"point has the wrong size, expected {n} x {n}")
        if not all(is_group_element(x, 1e-8) for x in parts):
            raise UsageError("point is not in SL_n")
    else:
        rng = np.random.default_rng(_merged(args, "seed") or 0)
        m = sigma_point(space, random_slice_point(space.spec, rng), rng)
    report = {"command": "reduce", "group": f"A{n - 1}", "word": " ".join(map(str, word.letters))}
    report["manifold"] = args.manifold
    try:
        sol = transversality_solve(space.spec, space.moment(m))
    except NotInOmega as exc:
        report.update({"pass": False, "error": str(exc)})
        _emit(report, args.out)
        return EXIT_FAIL
    report["solver_residual"] = sol.residual
    if np.abs(sol.u_coords).max(initial=0.0) > 1e-9:
        report.update({"pass": False, "error": "point is not on the slice", "u_norm": float(np.abs(sol.u_coords).max())})
        _emit(report, args.out)
        return EXIT_FAIL
    Phi = preimage_tangent(space, m, sol.point)
    rp = reduced_dirac(space, m, Phi)
    report["tangent_dim"] = Phi.shape[1]
    report["kernel_dim"] = rp.kernel_dim
    report["findings"] = rp.findings
    if rp.bivector is not None:
        rank, dim_int = leaf_rank_report(space, m, rp)
        C = Phi.T @ casimir_differentials(space, m).T
        table = C.T @ rp.bivector @ C
        report.update(rank=rank, leaf_intersection_dim=dim_int, bivector=rp.bivector, casimir_brackets=table)
    report["slice_point"] = sol.point.to_doc()
    report["pass"] = not rp.findings
    report["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    _emit(report, args.out)
    return EXIT_PASS if not rp.findings else EXIT_FAIL


def cmd_classical(args) -> int:
    t0 = time.perf_counter()
    partition = cl.parse_partition(args.partition)
    n = sum(partition)
    samples = _merged(args, "samples") or 20
    seed = _merged(args, "seed") or 0
    tol = _merged(args, "tol") or 1e-10
    tri = cl.jordan_triple(partition)
    sd = cl.slodowy_data(partition)
    findings = []
    res_triple = max(tri.residuals())
    sv = sd.omega_singular_values
    omega_ratio = float(sv[-1] / sv[0]) if sv.size else 1.0
    if omega_ratio <= cl.OMEGA_RTOL:
        findings.append({"kind": "omega-degenerate", "ratio": omega_ratio})
    orbit = cl.orbit_dimension(tri.f)
    if sd.dim_slice + orbit != n * n - 1:
        findings.append({"kind": "not-transversal", "slice": sd.dim_slice, "orbit": orbit})
    worst = max(res_triple, cl.omega_isotropy(sd))
    ranks = set()
    lift = 0.0
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        nc, sc = cl.random_n_coords(rng, sd), cl.random_slice_coords(rng, sd)
        x = cl.adjoint_action_map(sd, nc, sc)
        try:
            sol = cl.classical_transversality_solve(sd, x, tol)
            worst = max(worst, sol.residual, float(np.abs(sol.s_coords - sc).max(initial=0.0)))
        except cl.SolverDivergence as exc:
            findings.append({"kind": "solver", "sample": i, "message": str(exc), "x": matrix_to_doc(x)})
        s = sd.slice_point(sc)
        red = cl.slodowy_reduced_bivector(sd, s)
        if red.bivector is None:
            findings.append({"kind": "kernel", "sample": i, "s": matrix_to_doc(s)})
            continue
        ranks.add(red.rank)
        df, dg = rng.normal(size=sd.dim_slice), rng.normal(size=sd.dim_slice)
        lift = max(lift, abs(cl.whittaker_bracket(sd, s, df, dg, i) - df @ red.bivector @ dg))
    origin = cl.slodowy_reduced_bivector(sd, tri.f)
    trivial = all(p == 1 for p in partition)
    lp_match = 0.0
    if trivial:
        # S is all of g: the reduced structure must be Lie-Poisson itself
        for i in range(min(samples, 5)):
            rng = np.random.default_rng([seed, samples + i])
            s = sd.slice_point(cl.random_slice_coords(rng, sd))
            Z = sd.centralizer_basis
            B = cl.slodowy_reduced_bivector(sd, s).bivector
            lp_match = max(lp_match, float(np.abs(Z @ B @ Z.T - cl.lie_poisson_matrix(s)).max()))
        worst = max(worst, lp_match)
    dims = {
        "slice": sd.dim_slice,
        "orbit": orbit,
        "g1": sd.grading.get(1, np.zeros((0, 0))).shape[1],
        "ell": sd.ell_basis.shape[1],
        "n": sd.n_basis.shape[1],
        "reduced_rank_generic": max(ranks) if ranks else -1,
        "reduced_rank_origin": origin.rank,
    }
    report = {
        "command": "classical",
        "group": f"A{n - 1}",
        "partition": list(partition),
        "samples": samples,
        "seed": seed,
        "tol": tol,
        "max_residual": worst,
        "dims": dims,
        "extras": {
            "triple_residual": res_triple,
            "omega_min_ratio": omega_ratio,
            "lift_consistency": lift,
            "trivial_triple": trivial,
            "lie_poisson_match": lp_match,
        },
        "findings": findings,
    }
    report["pass"] = bool(worst < tol and lift < 1e-7 and not findings)
    report["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    _emit(report, args.out)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="whittaker", description="Multiplicative Whittaker reduction checks.")
    p.add_argument("--config", help=f"key = value defaults (tol, samples, seed); default from ${CONFIG_ENV}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, word=True):
        sp.add_argument("--rank", type=int, default=2, help="matrix size n of SL_n")
        if word:
            sp.add_argument("--weyl", help='Weyl word, e.g. "1 2" (default: Coxeter word)')
        sp.add_argument("--out", help="write the report here instead of stdout")

    sp = sub.add_parser("info", help="root partition and slice dimensions")
    common(sp)
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("verify", help="run a property suite")
    common(sp)
    sp.add_argument("--check", required=True, help=f"one of: {', '.join(CHECK_IDS)}")
    sp.add_argument("--manifold", choices=sorted(MANIFOLDS), default="g")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--partition", help="classical checks: partition of n, e.g. 2,1")
    sp.add_argument("--formula", choices=("derived", "printed"), default="derived",
                    help="prop-sharp: which sign of the c2 term to test")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("reduce", help="reduced structure at one point over the slice")
    common(sp)
    sp.add_argument("--manifold", choices=sorted(MANIFOLDS), default="g")
    sp.add_argument("--point", help="point file; without it a seeded slice point is used")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("classical", help="Slodowy slice suite for a partition")
    sp.add_argument("--partition", required=True)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_classical)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.config_values = read_config(args.config)
        return args.func(args)
    except (UsageError, InvalidInput) as exc:
        print(f"whittaker: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
