"""Fixed-point solver: closed forms, dense oracles, uniqueness, diagnostics."""

import math

import numpy as np
import pytest

from conftest import rand_stats
from mimo_capacity import (SolverOptions, contraction_radius, five_cluster_stats,
                           hermitize, hpd_inverse, isotropic_stats, psd_sqrt,
                           random_covariance, receive_update, solve_canonical,
                           transmit_update)
from mimo_capacity.errors import NonConvergenceError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # root of d^2 + d - 1 = 0


class TestReceiveUpdate:
    def test_zero_weights(self):
        stats = isotropic_stats(4, 4, 1, sigma2=2.0)
        out = receive_update(np.zeros(1), stats)
        assert np.allclose(out, [1.0 / 2.0])

    def test_scalar_formula(self):
        stats = isotropic_stats(4, 4, 1, sigma2=1.0)
        out = receive_update(np.ones(1), stats)
        assert abs(out[0] - 0.5) < 1e-14

    def test_dense_algebra_oracle(self):
        stats = five_cluster_stats(4, 4, sigma2=0.1)
        dt = np.ones(5)
        acc = np.eye(4, dtype=complex)
        for c in stats.C_r:
            acc = acc + c
        T = hpd_inverse(stats.sigma2 * acc)
        expected = np.array([np.trace(c @ T).real / stats.t for c in stats.C_r])
        assert np.max(np.abs(receive_update(dt, stats) - expected)) < 1e-12

    def test_strictly_positive(self, rng):
        stats = rand_stats(rng, 5, 4, 3, 0.7)
        out = receive_update(rng.random(3), stats)
        assert np.all(out > 0)


class TestTransmitUpdate:
    def test_zero_weights_identity_q(self):
        stats = isotropic_stats(4, 4, 1, sigma2=2.0)
        out = transmit_update(np.zeros(1), None, stats)
        assert np.allclose(out, [1.0 / 2.0])

    def test_scalar_formula(self):
        stats = isotropic_stats(4, 4, 1, sigma2=1.0)
        out = transmit_update(np.ones(1), np.eye(4, dtype=complex), stats)
        assert abs(out[0] - 0.5) < 1e-14

    def test_singular_q_matches_conjugated_form(self, rng):
        # rank-deficient Q: both algebraic forms must agree
        stats = rand_stats(rng, 4, 4, 2, 0.5)
        u = np.linalg.qr(rng.standard_normal((4, 4))
                         + 1j * rng.standard_normal((4, 4)))[0]
        evals = np.array([2.4, 1.0, 0.6, 0.0])  # trace 4, one zero mode
        q = hermitize((u * evals) @ u.conj().T)
        delta = rng.random(2)

        s = psd_sqrt(q)
        conj = [hermitize(s @ c @ s) for c in stats.C_t]
        acc = np.eye(4, dtype=complex)
        for d, m in zip(delta, conj):
            acc = acc + d * m
        t_tilde = hpd_inverse(stats.sigma2 * acc)
        expected = np.array([np.trace(m @ t_tilde).real / stats.t
                             for m in conj])
        got = transmit_update(delta, q, stats)
        assert np.max(np.abs(got - expected)) < 1e-12


class TestSolveCanonical:
    def test_isotropic_closed_form(self):
        sol = solve_canonical(isotropic_stats(4, 4, 1, sigma2=1.0))
        assert abs(sol.delta[0] - GOLDEN) < 1e-8
        assert abs(sol.delta_tilde[0] - GOLDEN) < 1e-8

    def test_isotropic_high_noise_closed_form(self):
        # root of sigma2*d^2 + sigma2*d - 1 = 0 at sigma2 = 100
        sol = solve_canonical(isotropic_stats(4, 4, 1, sigma2=100.0))
        expected = (-1.0 + math.sqrt(1.04)) / 2.0
        assert abs(sol.delta[0] - expected) < 1e-8

    def test_residual_certificate(self):
        stats = five_cluster_stats(4, 4, sigma2=0.1)
        opts = SolverOptions(tol=1e-10)
        sol = solve_canonical(stats, None, opts)
        assert sol.residual <= opts.tol
        # independent recomputation with the public maps
        mism = max(np.max(np.abs(sol.delta - receive_update(sol.delta_tilde, stats))),
                   np.max(np.abs(sol.delta_tilde
                                 - transmit_update(sol.delta, None, stats))))
        denom = max(1.0, sol.delta.max(), sol.delta_tilde.max())
        assert mism / denom <= 1.01 * opts.tol

    def test_unique_solution_from_far_apart_starts(self):
        stats = five_cluster_stats(4, 4, sigma2=0.1)
        a = solve_canonical(stats, None, SolverOptions(init_delta=0.01))
        b = solve_canonical(stats, None, SolverOptions(init_delta=100.0))
        assert np.max(np.abs(a.delta - b.delta)) < 1e-8
        assert np.max(np.abs(a.delta_tilde - b.delta_tilde)) < 1e-8

    def test_uniqueness_random_instances(self, rng):
        for _ in range(10):
            r = int(rng.integers(2, 7))
            t = int(rng.integers(2, 7))
            L = int(rng.integers(1, 4))
            stats = rand_stats(rng, r, t, L, float(rng.uniform(0.05, 2.0)))
            q = random_covariance(t, rng)
            sols = [solve_canonical(stats, q, SolverOptions(init_delta=x))
                    for x in (0.1, 1.0, 10.0)]
            for s in sols[1:]:
                assert np.max(np.abs(s.delta - sols[0].delta)) < 1e-9
                assert np.max(np.abs(s.delta_tilde - sols[0].delta_tilde)) < 1e-9

    def test_positivity(self, rng):
        for _ in range(10):
            stats = rand_stats(rng, 4, 4, 3, float(rng.uniform(0.1, 5.0)))
            sol = solve_canonical(stats)
            assert np.all(sol.delta > 0)
            assert np.all(sol.delta_tilde > 0)

    def test_resolvents_match_returned_vectors(self):
        stats = five_cluster_stats(4, 4, sigma2=0.1)
        q = random_covariance(4, 3)
        sol = solve_canonical(stats, q)
        acc = np.eye(4, dtype=complex)
        for d, c in zip(sol.delta_tilde, stats.C_r):
            acc = acc + d * c
        assert np.max(np.abs(sol.T - hpd_inverse(stats.sigma2 * acc))) < 1e-12
        s = psd_sqrt(q)
        acc = np.eye(4, dtype=complex)
        for d, c in zip(sol.delta, stats.C_t):
            acc = acc + d * hermitize(s @ c @ s)
        assert np.max(np.abs(sol.T_tilde
                             - hpd_inverse(stats.sigma2 * acc))) < 1e-12

    def test_nonconvergence_carries_iterate(self):
        stats = five_cluster_stats(4, 4, sigma2=0.01)
        with pytest.raises(NonConvergenceError) as err:
            solve_canonical(stats, None, SolverOptions(tol=1e-10, max_iter=2))
        assert err.value.delta is not None
        assert err.value.residual > 0
        assert err.value.iterations == 2

    def test_options_validation(self):
        with pytest.raises(ValueError):
            SolverOptions(tol=0.0)
        with pytest.raises(ValueError):
            SolverOptions(max_iter=0)
        with pytest.raises(ValueError):
            SolverOptions(init_delta=-1.0)


class TestContractionRadius:
    def test_scalar_closed_form(self):
        stats = isotropic_stats(4, 4, 1, sigma2=1.0)
        sol = solve_canonical(stats)
        # isotropic case: A = delta^2, At = delta_tilde^2, rho = delta^4
        assert abs(contraction_radius(sol, stats) - GOLDEN ** 4) < 1e-8

    def test_high_noise_limit_small(self):
        stats = isotropic_stats(4, 4, 1, sigma2=1e3)
        sol = solve_canonical(stats)
        rho = contraction_radius(sol, stats)
        expected = stats.sigma2 ** 2 * (sol.delta[0] * sol.delta_tilde[0]) ** 2
        assert rho < 1e-4
        assert abs(rho - expected) < 1e-10

    def test_below_one_on_cluster_scenario(self):
        stats = five_cluster_stats(4, 4, sigma2=0.1)
        sol = solve_canonical(stats)
        assert contraction_radius(sol, stats) < 1.0

    def test_below_one_with_random_q(self, rng):
        stats = rand_stats(rng, 4, 5, 3, 0.3)
        q = random_covariance(5, rng)
        sol = solve_canonical(stats, q)
        assert contraction_radius(sol, stats, q) < 1.0
