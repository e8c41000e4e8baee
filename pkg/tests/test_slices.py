import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whittaker._linalg import containment_residual, numerical_rank
from whittaker.rootsys import InvalidInput, WeylWord, coxeter_word
from whittaker.slices import (
    InconsistentPoint,
    NotInOmega,
    SlicePoint,
    annihilator_omega,
    build_slice_spec,
    charpoly_distance,
    companion_oracle,
    omega_jacobian,
    omega_param,
    random_slice_point,
    random_u_coords,
    sigma_jacobian,
    sigma_param,
    split_u_c,
    tangent_omega,
    transversality_solve,
    z_is_open,
)

CASES = [((1,), 2), ((1, 2), 3), ((2,), 4), ((1,), 4), ((1, 2, 3), 4)]


def spec_of(letters, n):
    return build_slice_spec(WeylWord(letters), n)


def rng_for(i):
    return np.random.default_rng([17, i])


class TestSpec:
    @pytest.mark.parametrize(
        "letters, n, sigma, omega, comps",
        [((1,), 2, 1, 2, 2), ((1, 2), 3, 2, 5, 3), ((2,), 4, 5, 10, 1)],
    )
    def test_dimensions(self, letters, n, sigma, omega, comps):
        s = spec_of(letters, n)
        assert (s.dim_sigma, s.dim_omega, s.n_components) == (sigma, omega, comps)

    @pytest.mark.parametrize("letters, n", CASES)
    def test_dimension_count(self, letters, n):
        # U x Sigma -> Omega is a bijection and Omega has the expected codimension
        s = spec_of(letters, n)
        assert s.dim_omega == s.dim_u + s.dim_sigma
        assert s.dim_c == n - 1 - s.split.dim_t_w
        assert s.dim_sigma == len(s.flipped) + s.split.dim_t_w + 2 * len(s.fixed)
        assert s.u_basis().shape[1] == s.dim_u and s.z_basis().shape[1] == s.dim_z

    def test_point_document_roundtrip(self):
        s = spec_of((2,), 4)
        p = random_slice_point(s, rng_for(0))
        q = SlicePoint.from_doc(p.to_doc())
        assert np.array_equal(p.flat(), q.flat()) and q.component_index == p.component_index
        with pytest.raises(InvalidInput):
            SlicePoint.from_doc({"z_torus_coords": []})

    def test_bad_component(self):
        s = spec_of((1,), 2)
        with pytest.raises(InvalidInput):
            sigma_param(s, SlicePoint.zero(s, component_index=5))


class TestParametrization:
    def test_sl2_coxeter_point(self):
        s = spec_of((1,), 2)
        p = SlicePoint(np.array([-1.0 + 0j]), np.zeros(0), np.zeros(0), 0)
        assert np.allclose(sigma_param(s, p), [[1, 1], [-1, 0]])

    @pytest.mark.parametrize("letters, n", CASES)
    def test_in_group(self, letters, n):
        s = spec_of(letters, n)
        rng = rng_for(n)
        for _ in range(5):
            p = random_slice_point(s, rng)
            g = omega_param(s, random_u_coords(s, rng), p)
            assert abs(np.linalg.det(g) - 1) < 1e-10

    @pytest.mark.parametrize("letters, n", CASES)
    def test_jacobians_have_full_rank(self, letters, n):
        s = spec_of(letters, n)
        rng = rng_for(10 + n)
        p, u = random_slice_point(s, rng), random_u_coords(s, rng)
        assert numerical_rank(sigma_jacobian(s, p)) == s.dim_sigma
        assert numerical_rank(omega_jacobian(s, u, p)) == s.dim_omega

    @pytest.mark.parametrize("letters, n", CASES)
    def test_jacobian_matches_finite_difference(self, letters, n):
        s = spec_of(letters, n)
        fr = s.frame
        rng = rng_for(20 + n)
        p = random_slice_point(s, rng)
        g = sigma_param(s, p)
        J = sigma_jacobian(s, p)
        th = p.flat()
        h = 1e-6
        for k in range(s.dim_sigma):
            e = np.zeros_like(th)
            e[k] = h
            gp = sigma_param(s, SlicePoint.from_flat(s, th + e, p.component_index))
            gm = sigma_param(s, SlicePoint.from_flat(s, th - e, p.component_index))
            fd = fr.coords(np.linalg.solve(g, (gp - gm) / (2 * h)))
            assert np.abs(fd - J[:, k]).max() < 1e-6 * max(1, np.abs(J[:, k]).max())

    def test_exponential_and_factorized_charts_agree_at_zero(self):
        s = spec_of((2,), 4)
        p = SlicePoint.zero(s)
        assert z_is_open(s, p)
        assert np.allclose(sigma_param(s, p, open_cell=True), sigma_param(s, p, open_cell=False))

    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from(CASES), st.integers(0, 10**6))
    def test_conjugation_keeps_charpoly(self, case, seed):
        s = spec_of(*case)
        rng = np.random.default_rng(seed)
        p = random_slice_point(s, rng)
        assert charpoly_distance(omega_param(s, random_u_coords(s, rng), p), sigma_param(s, p)) < 1e-9


class TestTangents:
    @pytest.mark.parametrize("letters, n", [c for c in CASES if c != ((2,), 4)])
    def test_tangent_and_annihilator(self, letters, n):
        s = spec_of(letters, n)
        fr = s.frame
        rng = rng_for(30 + n)
        p, u = random_slice_point(s, rng), random_u_coords(s, rng)
        g = omega_param(s, u, p)
        T = tangent_omega(s, g)
        assert T.shape[1] == s.dim_omega
        assert containment_residual(omega_jacobian(s, u, p), T) < 1e-9
        K = annihilator_omega(s, g)
        assert K.shape[1] == fr.dim - s.dim_omega
        assert np.abs((fr.gram @ K).T @ T).max() < 1e-9

    def test_two_sided_span_too_large_off_good_position(self):
        # for (SL_4, s2) the two-sided span of u + z is not the tangent of Omega
        s = spec_of((2,), 4)
        rng = rng_for(35)
        g = omega_param(s, random_u_coords(s, rng), random_slice_point(s, rng))
        with pytest.raises(InconsistentPoint):
            tangent_omega(s, g)

    def test_split_u_c(self):
        s = spec_of((1, 2), 3)
        rng = rng_for(40)
        a = s.u_basis() @ rng.normal(size=s.dim_u) + s.c_basis() @ rng.normal(size=s.dim_c)
        nu, cc, res = split_u_c(s, a)
        assert res < 1e-12 and np.allclose(nu + cc, a)
        _, _, res = split_u_c(s, np.eye(s.frame.dim)[:, 0] + np.eye(s.frame.dim)[:, -1])
        assert res > 1e-3


class TestTransversality:
    @pytest.mark.parametrize("letters, n", CASES)
    def test_round_trip(self, letters, n):
        s = spec_of(letters, n)
        rng = rng_for(50 + n)
        for _ in range(5):
            p, u = random_slice_point(s, rng), random_u_coords(s, rng)
            g = omega_param(s, u, p)
            sol = transversality_solve(s, g)
            assert np.abs(omega_param(s, sol.u_coords, sol.point) - g).max() < 1e-9
            assert np.allclose(sol.u_coords, u, atol=1e-7)
            assert np.allclose(sol.point.flat(), p.flat(), atol=1e-7)

    def test_outside_omega(self):
        # the identity is not in U Z w U for a nontrivial Coxeter word
        with pytest.raises(NotInOmega):
            transversality_solve(spec_of((1,), 2), np.eye(2), seeds=1)


class TestCompanion:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_solver(self, n):
        s = build_slice_spec(coxeter_word(n), n)
        rng = rng_for(60 + n)
        for _ in range(5):
            g = omega_param(s, random_u_coords(s, rng), random_slice_point(s, rng))
            sol = transversality_solve(s, g)
            q = companion_oracle(n, g, sol.point.component_index)
            assert charpoly_distance(sigma_param(s, q), g) < 1e-9
            assert np.allclose(q.flat(), sol.point.flat(), atol=1e-7)

    def test_sl2_example(self):
        q = companion_oracle(2, np.array([[1.0, 1.0], [-1.0, 0.0]]))
        assert np.allclose(q.flat(), [-1.0])
