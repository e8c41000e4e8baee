import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whittaker.classical import (
    SolverDivergence,
    adjoint_action_map,
    affine_residual,
    classical_transversality_solve,
    jordan_triple,
    jordan_type,
    lie_poisson_eval,
    lie_poisson_matrix,
    omega_isotropy,
    orbit_dimension,
    parse_partition,
    partitions,
    random_n_coords,
    random_slice_coords,
    slodowy_data,
    slodowy_reduced_bivector,
    whittaker_bracket,
)
from whittaker._linalg import numerical_rank
from whittaker.liegroup import chevalley_frame, sample_algebra
from whittaker.rootsys import InvalidInput

ALL = [p for n in range(2, 6) for p in partitions(n)]


def transpose(part):
    return [sum(1 for p in part if p > j) for j in range(part[0])]


def centralizer_dim(part):
    """dim of the centralizer of a nilpotent of this type in sl_n."""
    return sum((2 * i + 1) * p for i, p in enumerate(part)) - 1


def orbit_dim(part):
    n = sum(part)
    return n * n - sum(c * c for c in transpose(part))


def rng_for(i):
    return np.random.default_rng([23, i])


class TestPartitions:
    def test_parse(self):
        assert parse_partition("1,2") == (2, 1)
        assert parse_partition([3]) == (3,)
        for bad in ("", "2,x", "0,2", "1"):
            with pytest.raises(InvalidInput):
                parse_partition(bad)

    def test_enumeration(self):
        assert [len(partitions(n)) for n in range(1, 7)] == [1, 2, 3, 5, 7, 11]
        assert partitions(3) == [(3,), (2, 1), (1, 1, 1)]


class TestTriple:
    @pytest.mark.parametrize("part", ALL)
    def test_relations_and_type(self, part):
        t = jordan_triple(part)
        assert max(t.residuals()) < 1e-12
        assert jordan_type(t.f) == part and jordan_type(t.e) == part
        assert np.allclose(np.diag(np.diag(t.h)), t.h) and abs(np.trace(t.h)) < 1e-12

    def test_regular_sl2(self):
        t = jordan_triple("2")
        assert np.allclose(t.f, [[0, 0], [1, 0]])
        assert np.allclose(t.h, np.diag([1, -1]))
        assert np.allclose(t.e, [[0, 1], [0, 0]])


class TestSliceData:
    @pytest.mark.parametrize("part", ALL)
    def test_dimensions(self, part):
        sd = slodowy_data(part)
        fr = sd.frame
        assert sd.dim_slice == centralizer_dim(part)
        assert orbit_dimension(sd.triple.f) == orbit_dim(part)
        assert sd.dim_slice + orbit_dim(part) == fr.dim
        assert 2 * sd.n_basis.shape[1] == orbit_dim(part)
        assert sd.n_perp_basis.shape[1] == fr.dim - sd.n_basis.shape[1]

    @pytest.mark.parametrize("part", ALL)
    def test_omega_and_lagrangian(self, part):
        sd = slodowy_data(part)
        g1 = sd.grading.get(1)
        if g1 is None or g1.shape[1] == 0:
            assert sd.ell_basis.shape[1] == 0
            return
        assert g1.shape[1] % 2 == 0
        sv = sd.omega_singular_values
        assert sv[-1] > 1e-8 * sv[0]
        assert sd.ell_basis.shape[1] == g1.shape[1] // 2
        assert omega_isotropy(sd) < 1e-10
        assert omega_isotropy(slodowy_data(part, seed=3)) < 1e-10

    @pytest.mark.parametrize("part", [(2,), (3,), (2, 1), (3, 2), (2, 2, 1)])
    def test_n_is_nilpotent_subalgebra(self, part):
        sd = slodowy_data(part, seed=1)
        fr = sd.frame
        rng = rng_for(1)
        x, y = sd.n_element(random_n_coords(rng, sd)), sd.n_element(random_n_coords(rng, sd))
        br = fr.coords(x @ y - y @ x)
        coef = np.linalg.lstsq(sd.n_basis, br, rcond=None)[0]
        assert np.abs(sd.n_basis @ coef - br).max() < 1e-10
        assert np.abs(np.linalg.matrix_power(x, sum(part))).max() < 1e-10

    def test_slice_in_affine_space(self):
        sd = slodowy_data("3,1")
        s = sd.slice_point(random_slice_coords(rng_for(2), sd))
        assert affine_residual(sd, s) < 1e-12


class TestTransversality:
    @pytest.mark.parametrize("part", [(2,), (3,), (2, 1), (4,), (3, 1), (2, 2)])
    def test_round_trip(self, part):
        sd = slodowy_data(part)
        rng = rng_for(3)
        for _ in range(5):
            nc, sc = random_n_coords(rng, sd, 0.5), random_slice_coords(rng, sd, 0.5)
            x = adjoint_action_map(sd, nc, sc)
            assert affine_residual(sd, x) < 1e-10
            sol = classical_transversality_solve(sd, x)
            assert sol.residual < 1e-10
            assert np.allclose(sol.n_coords, nc, atol=1e-8) and np.allclose(sol.s_coords, sc, atol=1e-8)

    def test_rejects_point_off_affine_space(self):
        sd = slodowy_data("2")
        with pytest.raises(InvalidInput):
            classical_transversality_solve(sd, 2 * sd.triple.f)

    def test_divergence_is_reported(self):
        with pytest.raises(SolverDivergence):
            sd = slodowy_data("3")
            classical_transversality_solve(sd, adjoint_action_map(sd, [40, 40, 40], [3, 3]), tol=1e-30)


class TestLiePoisson:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 4), st.integers(0, 10**6))
    def test_matrix_matches_eval(self, n, seed):
        rng = np.random.default_rng(seed)
        fr = chevalley_frame(n)
        x, a, b = (sample_algebra(rng, n) for _ in range(3))
        flat = fr.covector_flat(a) @ lie_poisson_matrix(x) @ fr.covector_flat(b)
        assert abs(flat - lie_poisson_eval(x, a, b)) < 1e-9 * max(1, abs(flat))

    @pytest.mark.parametrize("n", [2, 3])
    def test_regular_rank(self, n):
        x = sample_algebra(rng_for(n), n)
        assert numerical_rank(lie_poisson_matrix(x)) == n * n - n


class TestReduction:
    @pytest.mark.parametrize("part, generic, origin", [((2,), 0, 0), ((3,), 0, 0), ((2, 1), 2, 0), ((1, 1), 2, 0)])
    def test_ranks(self, part, generic, origin):
        sd = slodowy_data(part)
        s = sd.slice_point(random_slice_coords(rng_for(4), sd))
        red = slodowy_reduced_bivector(sd, s)
        assert red.kernel_dim == 0 and red.rank == generic
        assert slodowy_reduced_bivector(sd, sd.slice_origin).rank == origin

    def test_trivial_partition_is_lie_poisson(self):
        sd = slodowy_data("1,1,1")
        fr = sd.frame
        s = sd.slice_point(random_slice_coords(rng_for(5), sd))
        Z = sd.centralizer_basis
        # covectors in the centralizer basis are flat covectors pulled back by Z
        lp = lie_poisson_matrix(s)
        B = slodowy_reduced_bivector(sd, s).bivector
        assert np.allclose(Z @ B @ Z.T, lp, atol=1e-9)
        assert sd.dim_slice == fr.dim

    @pytest.mark.parametrize("part", [(2,), (3,), (2, 1), (3, 1), (2, 2), (2, 1, 1)])
    def test_lifts_match_dirac_pullback(self, part):
        rng = rng_for(6)
        sd = slodowy_data(part)
        alt = slodowy_data(part, seed=5)
        s_coords = random_slice_coords(rng, sd)
        s = sd.slice_point(s_coords)
        B = slodowy_reduced_bivector(sd, s).bivector
        for _ in range(3):
            df = rng.normal(size=sd.dim_slice) + 1j * rng.normal(size=sd.dim_slice)
            dg = rng.normal(size=sd.dim_slice) + 1j * rng.normal(size=sd.dim_slice)
            target = df @ B @ dg
            scale = max(1.0, abs(target))
            for data, ext in ((sd, None), (sd, 9), (alt, None), (alt, 4)):
                assert abs(whittaker_bracket(data, s, df, dg, ext) - target) < 1e-7 * scale
