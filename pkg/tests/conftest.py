"""Shared helpers for the test suite."""

import numpy as np
import pytest

from mimo_capacity import ChannelStats, hermitize


def rand_hermitian(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitize(a) * scale


def rand_psd(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitize(a @ a.conj().T) * scale


def rand_correlation(rng, n):
    """Random positive-definite matrix with trace n (correlation-like)."""
    c = rand_psd(rng, n)
    c += 0.05 * np.trace(c).real / n * np.eye(n)  # keep it well conditioned
    return hermitize(c * (n / np.trace(c).real))


def rand_stats(rng, r, t, L, sigma2):
    """Random channel statistics with PD correlation pairs."""
    return ChannelStats(
        r, t,
        tuple(rand_correlation(rng, r) for _ in range(L)),
        tuple(rand_correlation(rng, t) for _ in range(L)),
        sigma2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
