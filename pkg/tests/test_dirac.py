import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whittaker.dirac import (
    LagrangianSubspace,
    dirac_pullback,
    dirac_pushforward,
    graph_of_bivector,
    graph_of_two_form,
    kernel_and_classify,
    leaf_data,
)
from whittaker.rootsys import InvalidInput


def antisym(rng, n, rank=None):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = A - A.T
    if rank is not None:
        # restrict to a random subspace of even dimension
        Q = np.linalg.qr(rng.normal(size=(n, rank)))[0]
        A = Q @ (Q.T @ A @ Q) @ Q.T
    return A


class TestGraphs:
    def test_isotropic_and_lagrangian(self):
        rng = np.random.default_rng(0)
        for n in (2, 3, 5):
            L = graph_of_bivector(antisym(rng, n))
            assert L.basis.shape == (2 * n, n) and L.isotropy_residual() < 1e-12
            L = graph_of_two_form(antisym(rng, n))
            assert L.isotropy_residual() < 1e-12

    def test_rejects_symmetric(self):
        with pytest.raises(InvalidInput):
            graph_of_bivector(np.eye(2))
        with pytest.raises(InvalidInput):
            LagrangianSubspace.from_span(np.vstack([np.eye(2), np.eye(2)]))

    def test_nondegenerate_bivector_is_inverse_form(self):
        rng = np.random.default_rng(1)
        P = antisym(rng, 4)
        assert graph_of_bivector(P).same_as(graph_of_two_form(np.linalg.inv(P)))

    def test_classification(self):
        rng = np.random.default_rng(2)
        P = antisym(rng, 5, rank=4)
        c = kernel_and_classify(graph_of_bivector(P))
        assert c.kernel_dim == 0 and c.cokernel_dim == 1 and c.two_form is None
        assert np.allclose(c.bivector, P)
        Q, form = leaf_data(graph_of_bivector(P))
        assert Q.shape[1] == 4 and np.linalg.matrix_rank(form) == 4
        w = antisym(rng, 3)
        c = kernel_and_classify(graph_of_two_form(w))
        assert c.cokernel_dim == 0 and np.allclose(c.two_form, w)


class TestFunctoriality:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 5), st.integers(1, 4), st.integers(0, 10**6))
    def test_pullback_of_two_form(self, n, k, seed):
        rng = np.random.default_rng(seed)
        w = antisym(rng, n)
        phi = rng.normal(size=(n, k))
        L = dirac_pullback(phi, graph_of_two_form(w))
        assert L.same_as(graph_of_two_form(phi.T @ w @ phi), tol=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 5), st.integers(1, 4), st.integers(0, 10**6))
    def test_pushforward_of_bivector(self, n, m, seed):
        rng = np.random.default_rng(seed)
        P = antisym(rng, n)
        psi = rng.normal(size=(min(m, n), n))
        L = dirac_pushforward(psi, graph_of_bivector(P))
        assert L.same_as(graph_of_bivector(psi @ P @ psi.T), tol=1e-8)

    def test_pullback_to_symplectic_submanifold(self):
        # inclusion of a symplectic subspace of a Poisson bivector: pullback is graph of the restricted inverse
        P = np.zeros((4, 4))
        P[0, 1], P[1, 0] = 1.0, -1.0
        P[2, 3], P[3, 2] = 2.0, -2.0
        iota = np.eye(4)[:, :2]
        L = dirac_pullback(iota, graph_of_bivector(P))
        c = kernel_and_classify(L)
        assert c.kernel_dim == 0 and np.allclose(c.bivector, [[0, 1], [-1, 0]])

    def test_dimension_checks(self):
        L = graph_of_bivector(np.zeros((3, 3)))
        with pytest.raises(InvalidInput):
            dirac_pullback(np.eye(2), L)
        with pytest.raises(InvalidInput):
            dirac_pushforward(np.eye(2), L)
