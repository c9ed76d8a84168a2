import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bistoch.exceptions import DimensionError, NotHermitianError
from bistoch.linalg_core import (child_seed, classify, fourier_matrix, hermitian_eig, kron,
                                 matrix_from_json, matrix_to_json, psd_factor, random_unitary,
                                 schur_product, unitary_defect)

U3 = np.array([[-1, 2, 2], [2, -1, 2], [2, 2, -1]]) / 3


def naive_schur(A, B):
    n = A.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i, j] = A[i, j] * B[i, j]
    return out


def naive_kron(A, B):
    p, q = A.shape[0], B.shape[0]
    out = np.zeros((p * q, p * q), dtype=complex)
    for i in range(p):
        for j in range(p):
            for k in range(q):
                for l in range(q):
                    out[i * q + k, j * q + l] = A[i, j] * B[k, l]
    return out


def complex_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


class TestSchurAndKron:
    def test_identity_and_zero(self, rng):
        A = complex_matrix(rng, 4)
        np.testing.assert_array_equal(schur_product(A, np.ones((4, 4))), A)
        np.testing.assert_array_equal(schur_product(A, np.zeros((4, 4))), 0)

    def test_witness_squared_modulus(self):
        expected = np.array([[1, 4, 4], [4, 1, 4], [4, 4, 1]]) / 9
        np.testing.assert_allclose(schur_product(U3, U3.conj()), expected, atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            schur_product(np.eye(2), np.eye(3))

    def test_kron_dimensions_and_identity(self):
        assert kron(np.ones((3, 3)), np.ones((2, 2))).shape == (6, 6)
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))

    def test_kron_katz_block_pattern(self):
        B3 = np.array([[0, .5, .5], [.5, 0, .5], [.5, .5, 0]])
        K = kron(B3, np.eye(2))
        assert K[0, 2] == 0.5 and K[0, 3] == 0.0 and K[1, 3] == 0.5 and K[0, 0] == 0.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_against_naive_loops(self, p, q, seed):
        rng = np.random.default_rng(seed)
        A, B, C = complex_matrix(rng, p), complex_matrix(rng, p), complex_matrix(rng, q)
        assert np.max(np.abs(schur_product(A, B) - naive_schur(A, B))) <= 1e-14
        assert np.max(np.abs(kron(A, C) - naive_kron(A, C))) <= 1e-14


class TestFourier:
    def test_n2(self):
        np.testing.assert_allclose(fourier_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2),
                                   atol=1e-15)

    def test_n3_second_column(self):
        w = np.exp(2j * np.pi / 3)
        np.testing.assert_allclose(fourier_matrix(3)[:, 1], np.array([1, w, w**2]) / np.sqrt(3),
                                   atol=1e-15)

    def test_f4_unitary(self):
        F = fourier_matrix(4)
        assert np.max(np.abs(F @ F.conj().T - np.eye(4))) <= 1e-12

    def test_unitary_up_to_64(self):
        for n in range(1, 65):
            assert unitary_defect(fourier_matrix(n)) <= 1e-10


class TestClassify:
    def test_witness(self):
        f = classify(U3)
        assert f.hermitian and f.unitary and f.hermitian_unitary and not f.positive_semidefinite

    def test_identity(self):
        f = classify(np.eye(3))
        assert f.hermitian and f.unitary and f.hermitian_unitary and f.positive_semidefinite

    def test_diag_i_1(self):
        f = classify(np.diag([1j, 1]))
        assert f.unitary and not f.hermitian and not f.hermitian_unitary

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_flag_invariants(self, n, seed):
        rng = np.random.default_rng(seed)
        A = complex_matrix(rng, n)
        for M in (A, A + A.conj().T, A @ A.conj().T, random_unitary(n, seed)):
            f = classify(M)
            assert f.hermitian_unitary == (f.hermitian and f.unitary)
            assert not f.positive_semidefinite or f.hermitian


class TestHermitianEig:
    def test_diagonal(self):
        np.testing.assert_allclose(hermitian_eig(np.diag([3.0, 1.0, 2.0])).eigenvalues, [3, 2, 1])

    def test_swap(self):
        s = hermitian_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(s.eigenvalues, [1, -1], atol=1e-15)
        np.testing.assert_allclose(np.abs(s.eigenvectors), np.full((2, 2), 1 / np.sqrt(2)),
                                   atol=1e-15)

    def test_witness_spectrum(self):
        # characteristic polynomial of U3 is (x - 1)(x + 1)^2
        coeffs = np.poly(U3)
        np.testing.assert_allclose(coeffs, [1, 1, -1, -1], atol=1e-12)
        s = hermitian_eig(U3)
        np.testing.assert_allclose(s.eigenvalues, [1, -1, -1], atol=1e-12)
        assert np.trace(U3) == pytest.approx(-1)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            hermitian_eig(np.array([[0, 1], [0, 0]]))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_reconstruction(self, n, seed):
        rng = np.random.default_rng(seed)
        A = complex_matrix(rng, n)
        H = A + A.conj().T
        s = hermitian_eig(H)
        assert np.all(np.diff(s.eigenvalues) <= 0)
        assert np.max(np.abs(s.reconstruct() - H)) <= 1e-10 * n * max(1.0, np.abs(H).max())
        assert unitary_defect(s.eigenvectors) <= 1e-10
        s2 = hermitian_eig(H)
        np.testing.assert_array_equal(s.eigenvectors, s2.eigenvectors)


class TestRandomUnitary:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 2**63))
    def test_unitary_and_deterministic(self, n, seed):
        U = random_unitary(n, seed)
        assert classify(U).unitary
        assert np.max(np.abs(U @ U.conj().T - np.eye(n))) <= 1e-10
        np.testing.assert_array_equal(U, random_unitary(n, seed))

    def test_n1_unimodular(self):
        U = random_unitary(1, 3)
        assert U.shape == (1, 1) and abs(abs(U[0, 0]) - 1) <= 1e-12

    def test_phase_invariance(self):
        # the (0, 0) entry of a Haar unitary has uniformly distributed phase
        phases = np.array([np.angle(random_unitary(3, s)[0, 0]) for s in range(4000)])
        assert abs(np.mean(np.cos(phases))) < 0.05 and abs(np.mean(np.sin(phases))) < 0.05

    def test_child_seed_distinct(self):
        seeds = {child_seed(0, i) for i in range(100)}
        assert len(seeds) == 100 and child_seed(0, 5) == child_seed(0, 5)


def test_psd_factor(rng):
    V = rng.standard_normal((2, 5))
    C = V.T @ V
    G = psd_factor(C)
    assert G.shape[1] == 2
    assert np.max(np.abs(G @ G.conj().T - C)) <= 1e-12


def test_matrix_json_round_trip(rng):
    A = complex_matrix(rng, 3)
    np.testing.assert_array_equal(matrix_from_json(matrix_to_json(A)), A)
    R = rng.standard_normal((4, 4))
    obj = matrix_to_json(R)
    assert all(isinstance(x, float) for x in obj["entries"])
    np.testing.assert_array_equal(matrix_from_json(obj), R)
    np.testing.assert_array_equal(matrix_from_json({"n": 2, "entries": [[1, 2], [3, 4]]}),
                                  [[1, 2], [3, 4]])
    with pytest.raises(DimensionError):
        matrix_from_json({"n": 2, "entries": [1, 2, 3]})
