import numpy as np
import pytest

from cfisac.numerics import (hermitian_eig, principal_generalized_direction,
                             rank_one_plus_identity_inverse_apply)

from helpers import subspace_angle


def random_hermitian(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (A + A.conj().T)


class TestHermitianEig:
    def test_diagonal(self):
        res = hermitian_eig(np.diag([1.0, 2.0, 3.0]))
        assert np.allclose(res.eigenvalues, [1.0, 2.0, 3.0])
        assert np.allclose(np.abs(res.eigenvectors), np.eye(3))

    def test_pauli_y_spectrum(self):
        A = np.array([[0, -1j], [1j, 0]])
        res = hermitian_eig(A)
        assert np.allclose(res.eigenvalues, [-1.0, 1.0])

    def test_reconstruction_50(self):
        rng = np.random.default_rng(0)
        A = random_hermitian(rng, 50)
        res = hermitian_eig(A)
        V, lam = res.eigenvectors, res.eigenvalues
        assert np.linalg.norm(V @ np.diag(lam) @ V.conj().T - A) <= 1e-9 * np.linalg.norm(A)
        assert np.linalg.norm(V.conj().T @ V - np.eye(50)) <= 1e-10
        for i in range(50):
            assert np.linalg.norm(A @ V[:, i] - lam[i] * V[:, i]) <= 1e-9 * np.linalg.norm(A)

    def test_phase_convention_deterministic(self):
        rng = np.random.default_rng(1)
        A = random_hermitian(rng, 8)
        r1, r2 = hermitian_eig(A), hermitian_eig(A.copy())
        assert np.array_equal(r1.eigenvectors, r2.eigenvectors)
        for i in range(8):
            v = r1.eigenvectors[:, i]
            j = np.argmax(np.abs(v))
            assert v[j].imag == 0 and v[j].real > 0

    def test_rejects_nonfinite(self):
        A = np.eye(3, dtype=complex)
        A[0, 0] = np.nan
        with pytest.raises(ValueError):
            hermitian_eig(A)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestShermanMorrison:
    def test_zero_update(self):
        X = np.arange(6.0).reshape(3, 2) + 0j
        got = rank_one_plus_identity_inverse_apply(np.zeros(3), 2.0, X)
        assert np.allclose(got, X / 2.0)

    def test_scalar_case(self):
        got = rank_one_plus_identity_inverse_apply(np.array([1.0]), 1.0,
                                                   np.array([[2.0]]))
        assert got[0, 0] == pytest.approx(1.0)

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(2)
        n = 64
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        X = rng.standard_normal((n, 5)) + 1j * rng.standard_normal((n, 5))
        sigma2 = 0.37
        R = np.outer(c, c.conj()) + sigma2 * np.eye(n)
        want = np.linalg.solve(R, X)
        got = rank_one_plus_identity_inverse_apply(c, sigma2, X)
        assert np.linalg.norm(got - want) <= 1e-10 * np.linalg.norm(want)

    def test_vector_input(self):
        rng = np.random.default_rng(3)
        c = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        R = np.outer(c, c.conj()) + 1.5 * np.eye(8)
        got = rank_one_plus_identity_inverse_apply(c, 1.5, x)
        assert np.allclose(got, np.linalg.solve(R, x), atol=1e-12)

    def test_rejects_zero_sigma(self):
        with pytest.raises(ValueError):
            rank_one_plus_identity_inverse_apply(np.ones(3), 0.0, np.eye(3))


def dense_principal_direction(V, c, sigma2):
    """Oracle: full-size Hermitian eigensolve of R^{-1/2} V V^H R^{-1/2}."""
    n = V.shape[0]
    R = np.outer(c, c.conj()) + sigma2 * np.eye(n)
    L = np.linalg.cholesky(R)
    Linv = np.linalg.inv(L)
    M = Linv @ V
    vals, vecs = np.linalg.eigh(M @ M.conj().T)
    u = Linv.conj().T @ vecs[:, -1]
    return u / np.linalg.norm(u)


class TestPrincipalGeneralizedDirection:
    def test_single_column_matched(self):
        rng = np.random.default_rng(4)
        v = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        c = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        u = principal_generalized_direction(v[:, None], c, 0.8)
        R = np.outer(c, c.conj()) + 0.8 * np.eye(12)
        want = np.linalg.solve(R, v)
        want /= np.linalg.norm(want)
        assert np.abs(np.vdot(want, u)) == pytest.approx(1.0, abs=1e-12)

    def test_no_clutter_matched_filter(self):
        rng = np.random.default_rng(5)
        v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        u = principal_generalized_direction(v[:, None], np.zeros(9), 1.0)
        assert np.abs(np.vdot(v / np.linalg.norm(v), u)) == pytest.approx(1.0, abs=1e-12)

    def test_matches_dense_oracle(self):
        # first column boosted so the top eigenvalue is well separated and
        # the principal direction is well conditioned
        rng = np.random.default_rng(6)
        for _ in range(20):
            V = rng.standard_normal((40, 3)) + 1j * rng.standard_normal((40, 3))
            V[:, 0] *= 3.0
            c = rng.standard_normal(40) + 1j * rng.standard_normal(40)
            u = principal_generalized_direction(V, c, 0.5)
            want = dense_principal_direction(V, c, 0.5)
            assert subspace_angle(want, u) <= 1e-8

    def test_rayleigh_quotient_parity(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            V = rng.standard_normal((30, 4)) + 1j * rng.standard_normal((30, 4))
            c = rng.standard_normal(30) + 1j * rng.standard_normal(30)
            sigma2 = 0.9

            def quotient(u):
                R = np.outer(c, c.conj()) + sigma2 * np.eye(30)
                num = np.linalg.norm(V.conj().T @ u) ** 2
                return num / np.real(np.vdot(u, R @ u))

            u = principal_generalized_direction(V, c, sigma2)
            want = quotient(dense_principal_direction(V, c, sigma2))
            assert quotient(u) == pytest.approx(want, rel=1e-9)

    def test_rejects_zero_target(self):
        with pytest.raises(ValueError):
            principal_generalized_direction(np.zeros((10, 2)), np.ones(10), 1.0)
