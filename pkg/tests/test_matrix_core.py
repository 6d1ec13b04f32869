"""Hermitian linear-algebra primitives: examples, oracles, invariants."""

import numpy as np
import pytest

from conftest import rand_hermitian, rand_psd
from mimo_capacity.errors import NotPosDefError, NotPsdError
from mimo_capacity.matrix_core import (hermitian_eig, hermitize, hpd_inverse,
                                       log_det_i_plus, psd_sqrt,
                                       spectral_radius_nonneg)


class TestHermitize:
    def test_exact_symmetry(self, rng):
        for n in (1, 3, 7):
            h = hermitize(rng.standard_normal((n, n))
                          + 1j * rng.standard_normal((n, n)))
            assert np.max(np.abs(h - h.conj().T)) == 0.0

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            hermitize(np.zeros((2, 3)))


class TestHermitianEig:
    def test_identity(self):
        w, u = hermitian_eig(np.eye(3, dtype=complex))
        assert np.allclose(w, [1, 1, 1])
        assert np.allclose(u, np.eye(3))

    def test_diagonal_sorted_with_permuted_eigenvectors(self):
        w, u = hermitian_eig(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert np.allclose(w, [1, 2, 3])
        expected = np.zeros((3, 3))
        expected[1, 0] = expected[2, 1] = expected[0, 2] = 1.0
        assert np.allclose(u, expected)

    def test_reconstruction_oracle(self, rng):
        m = rand_hermitian(rng, 5)
        w, u = hermitian_eig(m)
        scale = 1.0 + float(np.max(np.abs(m)))
        assert np.max(np.abs((u * w) @ u.conj().T - m)) <= 1e-9 * scale

    def test_unitarity_invariant(self, rng):
        for n in (1, 2, 6, 12):
            w, u = hermitian_eig(rand_hermitian(rng, n))
            assert np.max(np.abs(u @ u.conj().T - np.eye(n))) <= 1e-10
            assert np.all(np.diff(w) >= 0)

    def test_phase_convention(self, rng):
        for _ in range(20):
            _, u = hermitian_eig(rand_hermitian(rng, 5))
            for k in range(5):
                col = u[:, k]
                lead = int(np.argmax(np.abs(col) > 1e-8 * np.abs(col).max()))
                assert col[lead].real >= 0
                assert abs(col[lead].imag) == 0.0

    def test_deterministic(self, rng):
        m = rand_hermitian(rng, 6)
        d1 = hermitian_eig(m)
        d2 = hermitian_eig(m.copy())
        assert np.array_equal(d1.eigenvalues, d2.eigenvalues)
        assert np.array_equal(d1.eigenvectors, d2.eigenvectors)

    def test_rejects_non_finite(self):
        m = np.eye(2, dtype=complex)
        m[0, 1] = np.nan
        with pytest.raises(ValueError):
            hermitian_eig(m)


class TestPsdSqrt:
    def test_diagonal(self):
        s = psd_sqrt(np.diag([4.0, 9.0]).astype(complex))
        assert np.allclose(s, np.diag([2.0, 3.0]))

    def test_identity(self):
        assert np.allclose(psd_sqrt(np.eye(5, dtype=complex)), np.eye(5))

    def test_multiplication_oracle(self, rng):
        m = rand_psd(rng, 6)
        s = psd_sqrt(m)
        assert np.max(np.abs(s @ s - m)) <= 1e-9 * (1 + np.max(np.abs(m)))

    def test_clamps_rounding_negatives(self):
        m = np.diag([1.0, -1e-12]).astype(complex)
        s = psd_sqrt(m)
        assert np.allclose(s, np.diag([1.0, 0.0]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPsdError):
            psd_sqrt(np.diag([1.0, -0.5]).astype(complex))

    def test_square_property_many_dims(self, rng):
        # 1000 random PSD matrices, dims 1..16
        for i in range(1000):
            n = 1 + i % 16
            m = rand_psd(rng, n)
            s = psd_sqrt(m)
            assert np.max(np.abs(s @ s - m)) <= 1e-9 * (1 + np.max(np.abs(m)))


class TestLogDetIPlus:
    def test_zero(self):
        assert log_det_i_plus(np.zeros((4, 4), dtype=complex)) == 0.0

    def test_analytic_logs(self):
        m = np.diag([np.e - 1.0, np.e ** 2 - 1.0]).astype(complex)
        assert abs(log_det_i_plus(m) - 3.0) < 1e-12

    def test_determinant_oracle(self, rng):
        m = rand_psd(rng, 4)
        direct = np.log(np.linalg.det(np.eye(4) + m).real)
        assert abs(log_det_i_plus(m) - direct) < 1e-10

    def test_rejects_eigenvalue_at_minus_one(self):
        with pytest.raises(NotPosDefError):
            log_det_i_plus(np.diag([-1.0, 0.0]).astype(complex))

    def test_monotone_in_psd_order(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 7))
            m1 = rand_psd(rng, n)
            m2 = m1 + rand_psd(rng, n)  # m2 - m1 is PSD
            assert log_det_i_plus(m2) >= log_det_i_plus(m1) - 1e-10


class TestHpdInverse:
    def test_scaled_identity(self):
        assert np.allclose(hpd_inverse(2 * np.eye(3, dtype=complex)),
                           0.5 * np.eye(3))

    def test_diagonal(self):
        inv = hpd_inverse(np.diag([2.0, 4.0]).astype(complex))
        assert np.allclose(inv, np.diag([0.5, 0.25]))

    def test_product_oracle(self, rng):
        m = rand_psd(rng, 8) + np.eye(8)
        inv = hpd_inverse(m)
        cond = np.linalg.cond(m)
        assert np.max(np.abs(m @ inv - np.eye(8))) <= 1e-9 * cond

    def test_rejects_indefinite(self):
        with pytest.raises(NotPosDefError):
            hpd_inverse(np.diag([1.0, -1.0]).astype(complex))


class TestSpectralRadiusNonneg:
    def test_permutation(self):
        assert abs(spectral_radius_nonneg(np.array([[0.0, 1.0], [1.0, 0.0]]))
                   - 1.0) < 1e-10

    def test_diagonal(self):
        assert abs(spectral_radius_nonneg(np.diag([0.3, 0.7])) - 0.7) < 1e-12

    def test_dense_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 7))
            m = rng.random((n, n))
            dense = float(np.max(np.abs(np.linalg.eigvals(m))))
            assert abs(spectral_radius_nonneg(m) - dense) <= 1e-10 * max(1, dense)

    def test_periodic_falls_back_to_dense(self):
        m = np.array([[0.0, 2.0], [0.5, 0.0]])  # period-2 power iteration
        assert abs(spectral_radius_nonneg(m) - 1.0) < 1e-10

    def test_zero_matrix(self):
        assert spectral_radius_nonneg(np.zeros((3, 3))) == 0.0

    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError):
            spectral_radius_nonneg(np.array([[0.0, -1.0], [0.0, 0.0]]))
