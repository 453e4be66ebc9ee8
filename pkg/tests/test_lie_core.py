import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathball.lie_core import (AlgebraBasis, DimensionMismatch, adjoint,
                               exp_matrix, exp_so3, exp_so3_batch, hs_inner,
                               hs_norm, require_rotation, require_skew,
                               skew_basis, uniform_norm)

RNG = np.random.default_rng(20240817)
BASIS3 = AlgebraBasis(3)


def random_skew(dim=3, scale=1.0, rng=RNG):
    A = rng.normal(size=(dim, dim)) * scale
    return A - A.T


def random_rotation(dim=3, rng=RNG):
    return exp_matrix(random_skew(dim, rng=rng))


def exp_series(X, terms=30):
    # independent truncated power-series oracle
    S = np.eye(X.shape[0])
    T = np.eye(X.shape[0])
    for k in range(1, terms):
        T = T @ X / k
        S = S + T
    return S


class TestHsInner:
    def test_zero(self):
        Y = random_skew()
        assert hs_inner(np.zeros((3, 3)), Y) == 0.0

    def test_elementary(self):
        X = np.zeros((3, 3))
        X[0, 1], X[1, 0] = 1.0, -1.0
        assert hs_inner(X, X) == pytest.approx(2.0, abs=1e-15)

    def test_ad_invariance(self):
        for _ in range(100):
            u = random_rotation()
            X, Y = random_skew(), random_skew()
            assert hs_inner(adjoint(u, X), adjoint(u, Y)) == pytest.approx(
                hs_inner(X, Y), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hs_inner(np.zeros((3, 3)), np.zeros((4, 4)))

    def test_positive_definite(self):
        X = random_skew()
        assert hs_inner(X, X) > 0


class TestUniformNorm:
    def test_identity(self):
        assert uniform_norm(np.eye(4)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert uniform_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)

    def test_bounded_by_hs(self):
        for _ in range(50):
            A = RNG.normal(size=(3, 3))
            assert uniform_norm(A) <= hs_norm(A) + 1e-12

    def test_submultiplicative(self):
        for _ in range(20):
            A, B = RNG.normal(size=(3, 3)), RNG.normal(size=(3, 3))
            assert uniform_norm(A @ B) <= uniform_norm(A) * uniform_norm(B) + 1e-12


class TestExp:
    def test_zero(self):
        assert np.allclose(exp_matrix(np.zeros((3, 3))), np.eye(3))

    def test_quarter_turn(self):
        X = np.zeros((3, 3))
        X[0, 1], X[1, 0] = -np.pi / 2, np.pi / 2
        expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        assert np.allclose(exp_matrix(X), exp_series(X), atol=1e-13)
        assert np.allclose(exp_matrix(X), expected, atol=1e-12)

    def test_lands_in_group(self):
        for _ in range(50):
            require_rotation(exp_matrix(random_skew(scale=3.0)))

    def test_inverse_pairing(self):
        for _ in range(50):
            X = random_skew(scale=2.0)
            assert np.linalg.norm(exp_matrix(X) @ exp_matrix(-X) - np.eye(3)) <= 1e-10

    def test_rodrigues_matches_series(self):
        for _ in range(200):
            X = random_skew(scale=1.5)
            assert np.abs(exp_so3(X) - exp_series(X, 40)).max() < 1e-12

    def test_rodrigues_matches_pade(self):
        from scipy.linalg import expm
        for _ in range(1000):
            X = random_skew(scale=2.0)
            assert np.abs(exp_so3(X) - expm(X)).max() < 1e-12

    def test_batch_consistency(self):
        Xs = np.stack([random_skew(scale=2.0) for _ in range(64)])
        batch = exp_so3_batch(Xs)
        for X, e in zip(Xs, batch):
            assert np.allclose(e, exp_so3(X), atol=1e-14)

    def test_general_dim(self):
        X = random_skew(dim=5)
        require_rotation(exp_matrix(X))

    def test_lipschitz_sample(self):
        for _ in range(500):
            X, Y = random_skew(scale=1.5), random_skew(scale=1.5)
            assert uniform_norm(exp_matrix(X) - exp_matrix(Y)) \
                <= uniform_norm(X - Y) + 1e-12


class TestAdjoint:
    def test_identity(self):
        X = random_skew()
        assert np.allclose(adjoint(np.eye(3), X), X)

    def test_zero(self):
        u = random_rotation()
        assert np.allclose(adjoint(u, np.zeros((3, 3))), 0.0)

    def test_isometry(self):
        for _ in range(50):
            u, X = random_rotation(), random_skew()
            assert hs_inner(adjoint(u, X), adjoint(u, X)) == pytest.approx(
                hs_inner(X, X), abs=1e-12)

    def test_composition(self):
        u, v, X = random_rotation(), random_rotation(), random_skew()
        assert np.allclose(adjoint(u, adjoint(v, X)), adjoint(u @ v, X), atol=1e-12)

    def test_preserves_skewness(self):
        require_skew(adjoint(random_rotation(), random_skew()), tol=1e-12)

    def test_maps_basis_to_orthonormal_set(self):
        u = random_rotation()
        imgs = [adjoint(u, e) for e in BASIS3.elements]
        for i, a in enumerate(imgs):
            for j, b in enumerate(imgs):
                assert hs_inner(a, b) == pytest.approx(float(i == j), abs=1e-12)


class TestBasis:
    def test_orthonormal(self):
        for dim in (2, 3, 4):
            els = skew_basis(dim)
            gram = np.einsum("aij,bij->ab", els, els)
            assert np.abs(gram - np.eye(len(els))).max() < 1e-12

    def test_count(self):
        assert AlgebraBasis(4).algebra_dim == 6
        assert len(skew_basis(4)) == 6

    def test_roundtrip(self):
        X = random_skew()
        assert np.allclose(BASIS3.matrix(BASIS3.coords(X)), X, atol=1e-14)

    def test_too_small(self):
        with pytest.raises(ValueError):
            skew_basis(1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_exp_orthogonality_property(coords):
    X = BASIS3.matrix(np.array(coords))
    require_rotation(exp_matrix(X))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_lipschitz_property(coords):
    c = np.array(coords)
    X, Y = BASIS3.matrix(c[:3]), BASIS3.matrix(c[3:])
    assert uniform_norm(exp_matrix(X) - exp_matrix(Y)) <= uniform_norm(X - Y) + 1e-12
