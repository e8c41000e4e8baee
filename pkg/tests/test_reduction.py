import numpy as np
import pytest
from scipy.linalg import expm

from whittaker.doubles import moment_residual
from whittaker.liegroup import chevalley_frame, sample_group
from whittaker.rootsys import InvalidInput, WeylWord, coxeter_word
from whittaker.reduction import (
    NotOnSlice,
    bracket_via_lifts,
    casimir_differentials,
    characteristic_distribution,
    chart_at,
    charpoly_differentials,
    leaf_rank_report,
    locate_on_slice,
    make_space,
    omega_point,
    preimage_tangent,
    reduced_dirac,
    reduced_jacobiator,
    sharp_decomposition,
    sigma_point,
    transversality_rank,
)
from whittaker.slices import random_slice_point, random_u_coords

KINDS = ("GSelf", "HeisenbergDouble")


def rng_for(i):
    return np.random.default_rng([19, i])


def space(kind, n, letters=None):
    return make_space(kind, n, WeylWord(letters) if letters else coxeter_word(n), validate=False)


def expected_rank(kind, n, dim_sigma):
    """Generic rank: the double is symplectic; on G a Coxeter slice meets classes in points."""
    if kind == "HeisenbergDouble":
        return chevalley_frame(n).dim + dim_sigma
    return dim_sigma + (n * n - n) - (n * n - 1)


class TestSpaces:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("n", [2, 3])
    def test_moment_condition(self, kind, n):
        sp = space(kind, n)
        rng = rng_for(n)
        for _ in range(5):
            m = sp.random_point(rng)
            for B in sp.frame.basis[:4]:
                assert moment_residual(sp, m, B) < 1e-8

    def test_unknown_kind(self):
        with pytest.raises(InvalidInput):
            space("Torus", 2)

    def test_charpoly_differentials(self):
        n = 3
        fr = chevalley_frame(n)
        g = sample_group(rng_for(0), n)
        c, dc = charpoly_differentials(g, fr)
        assert np.allclose(c, np.poly(g)[1:n])
        h = 1e-6
        for k in range(fr.dim):
            fd = (np.poly(g @ expm(h * fr.basis[k])) - np.poly(g @ expm(-h * fr.basis[k])))[1:n] / (2 * h)
            assert np.allclose(dc[:, k], fd, atol=1e-7)


class TestPreimage:
    @pytest.mark.parametrize("kind", KINDS)
    def test_dimension_and_transversality(self, kind):
        sp = space(kind, 3)
        rng = rng_for(1)
        p = random_slice_point(sp.spec, rng, scale=0.5)
        m = sigma_point(sp, p, rng)
        Phi = preimage_tangent(sp, m, p)
        assert Phi.shape[1] == sp.dim - sp.frame.dim + sp.spec.dim_sigma
        assert transversality_rank(sp, m, p) == sp.frame.dim
        q = locate_on_slice(sp, m)
        assert np.allclose(q.flat(), p.flat(), atol=1e-8)

    def test_off_slice(self):
        sp = space("GSelf", 2)
        rng = rng_for(2)
        p = random_slice_point(sp.spec, rng)
        m = omega_point(sp, np.array([0.7 + 0j]), p)
        with pytest.raises(NotOnSlice):
            locate_on_slice(sp, m)


class TestReducedStructure:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("n, letters", [(2, None), (3, None), (4, None)])
    def test_generic_rank(self, kind, n, letters):
        sp = space(kind, n, letters)
        rng = rng_for(10 + n)
        for _ in range(3):
            p = random_slice_point(sp.spec, rng, scale=0.5)
            m = sigma_point(sp, p, rng)
            rp = reduced_dirac(sp, m)
            assert rp.kernel_dim == 0 and not rp.findings
            assert np.allclose(rp.bivector, -rp.bivector.T)
            rank, dim_int = leaf_rank_report(sp, m, rp)
            assert rank == dim_int == expected_rank(kind, n, sp.spec.dim_sigma)

    def test_sl4_s1_rank(self):
        sp = space("GSelf", 4, (1,))
        rng = rng_for(20)
        p = random_slice_point(sp.spec, rng, scale=0.5)
        assert leaf_rank_report(sp, sigma_point(sp, p)) == (2, 2)

    @pytest.mark.parametrize("kind", KINDS)
    def test_lift_brackets_agree(self, kind):
        sp = space(kind, 2)
        rng = rng_for(30)
        p = random_slice_point(sp.spec, rng, scale=0.5)
        m = sigma_point(sp, p, rng)
        rp = reduced_dirac(sp, m)
        k = rp.tangent_S.shape[1]
        for _ in range(3):
            df = rng.normal(size=k) + 1j * rng.normal(size=k)
            dg = rng.normal(size=k) + 1j * rng.normal(size=k)
            br = bracket_via_lifts(sp, m, df, dg, rp.tangent_S, rp)
            assert br.complement_spread < 1e-7 and br.residual < 1e-7

    @pytest.mark.parametrize("kind", KINDS)
    def test_casimirs_commute(self, kind):
        sp = space(kind, 3)
        rng = rng_for(31)
        m = sp.random_point(rng)
        C = casimir_differentials(sp, m)
        assert np.abs(C @ sp.bivector(m) @ C.T).max() < 1e-8

    def test_reduced_jacobi_on_double(self):
        sp = space("HeisenbergDouble", 2)
        rng = rng_for(32)
        chart, x = chart_at(sp, random_slice_point(sp.spec, rng, scale=0.5), rng)
        assert reduced_jacobiator(chart, x) < 1e-4


class TestSharp:
    @pytest.mark.parametrize("n, letters", [(2, (1,)), (3, (1, 2)), (4, (1,))])
    def test_derived_formula(self, n, letters):
        sp = space("GSelf", n, letters)
        rng = rng_for(40 + n)
        for _ in range(3):
            p, u = random_slice_point(sp.spec, rng, scale=0.5), random_u_coords(sp.spec, rng)
            r = sharp_decomposition(sp.spec, u, p)
            assert max(r.annihilator_membership, r.containment, r.formula_derived, r.char_residual) < 1e-8
            assert r.span_mismatch < 1e-8 and r.char_dim <= sp.spec.dim_u
            # the ρ(c2) coefficient with the opposite sign does not hold
            assert r.formula_printed > 1e-2

    def test_not_in_good_position(self):
        sp = space("GSelf", 4, (2,))
        rng = rng_for(50)
        p, u = random_slice_point(sp.spec, rng, scale=0.5), random_u_coords(sp.spec, rng)
        r = sharp_decomposition(sp.spec, u, p)
        assert r.annihilator_membership > 1e-2 and r.span_mismatch == np.inf

    @pytest.mark.parametrize("kind", KINDS)
    def test_characteristic_distribution(self, kind):
        sp = space(kind, 3)
        rng = rng_for(51)
        p, u = random_slice_point(sp.spec, rng, scale=0.5), random_u_coords(sp.spec, rng)
        m = omega_point(sp, u, p, rng)
        rep = characteristic_distribution(sp, m, u, p)
        assert rep.dim <= rep.dim_u
        assert rep.residual_u < 1e-8 and rep.residual_uc < 1e-8
