"""Monte-Carlo estimation of the ergodic mutual information.

The estimate of ``E_H[log det(I + H Q H^H / sigma2)]`` averages independent
channel draws.  Each trial uses its own counter-based random stream keyed by
``(seed, trial)``, so the set of trial values is identical no matter how the
work is chunked or distributed; accumulation uses exact compensated
summation (``math.fsum``) in trial order.  Together these make the result
bit-for-bit reproducible for a given ``(seed, trials)`` regardless of the
worker count.

Worker parallelism is capped by the ``MIMO_CAPACITY_THREADS`` environment
variable (0 or unset = automatic).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .canonical_solver import SolverOptions
from .channel_model import ChannelStats, channel_rng, draw_paths, path_factors
from .emi_approx import emi_approx, uniform_covariance
from .matrix_core import psd_sqrt

__all__ = ["EmiEstimate", "EmiGap", "emi_mc", "emi_gap", "resolve_workers"]

THREADS_ENV = "MIMO_CAPACITY_THREADS"
_CHUNK = 2048


@dataclass(frozen=True)
class EmiEstimate:
    """Sample mean (nats), standard error, and the run that produced them."""

    mean: float
    std_err: float
    trials: int
    seed: int


@dataclass(frozen=True, eq=False)
class EmiGap:
    """Side-by-side approximation vs Monte-Carlo comparison."""

    approx: float
    mc: EmiEstimate
    gap: float


def resolve_workers(limit: int | None = None) -> int:
    """Worker count from ``MIMO_CAPACITY_THREADS`` (0/unset = automatic)."""
    raw = os.environ.get(THREADS_ENV, "0") if limit is None else str(limit)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {n}")
    if n == 0:
        n = min(8, os.cpu_count() or 1)
    return n


def _chunk_values(stats, sqrt_r, sqrt_t, s_q, seed, lo, hi, out):
    """Fill ``out[lo:hi]`` with per-trial mutual-information values."""
    r, t = stats.r, stats.t
    n = hi - lo
    hs = np.empty((n, r, t), dtype=complex)
    for i in range(n):
        paths = draw_paths(channel_rng(seed, lo + i), sqrt_r, sqrt_t, t)
        h = paths[0]
        for p in paths[1:]:
            h = h + p
        hs[i] = h
    g = hs @ s_q
    m = np.einsum("nij,nkj->nik", g, g.conj()) / stats.sigma2
    w = np.linalg.eigvalsh(m)  # PSD up to rounding; log1p tolerates -eps
    out[lo:hi] = np.sum(np.log1p(w), axis=1)


def emi_mc(stats: ChannelStats, Q=None, trials: int = 100_000,
           seed: int = 0) -> EmiEstimate:
    """Monte-Carlo estimate of the EMI at covariance ``Q``.

    Parameters
    ----------
    stats : ChannelStats
        Channel description (including the noise power).
    Q : array_like or None
        Covariance with normalized trace; ``None`` means the identity.
    trials : int
        Number of independent channel draws (>= 2 for a standard error).
    seed : int
        Base seed; trial ``n`` always uses the stream keyed by ``(seed, n)``.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials for a standard error")
    q = uniform_covariance(stats.t) if Q is None else np.asarray(Q, dtype=complex)
    s_q = psd_sqrt(q)
    sqrt_r, sqrt_t = path_factors(stats)

    values = np.empty(trials)
    bounds = [(lo, min(lo + _CHUNK, trials)) for lo in range(0, trials, _CHUNK)]
    workers = resolve_workers()
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_chunk_values, stats, sqrt_r, sqrt_t, s_q,
                                   seed, lo, hi, values)
                       for lo, hi in bounds]
            for f in futures:
                f.result()
    else:
        for lo, hi in bounds:
            _chunk_values(stats, sqrt_r, sqrt_t, s_q, seed, lo, hi, values)

    mean = math.fsum(values) / trials
    var = math.fsum((v - mean) ** 2 for v in values) / (trials - 1)
    return EmiEstimate(mean=mean, std_err=math.sqrt(var / trials),
                       trials=trials, seed=seed)


def emi_gap(stats: ChannelStats, Q=None, trials: int = 100_000, seed: int = 0,
            opts: SolverOptions | None = None) -> EmiGap:
    """Absolute gap between the large-system approximation and Monte-Carlo."""
    approx = emi_approx(stats, Q, opts).value
    mc = emi_mc(stats, Q, trials=trials, seed=seed)
    return EmiGap(approx=approx, mc=mc, gap=abs(mc.mean - approx))
