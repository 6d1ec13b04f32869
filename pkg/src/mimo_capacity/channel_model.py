"""Kronecker-correlated multipath MIMO channel synthesis and sampling.

Each propagation path is a scatterer cluster described by a mean angle of
departure, a mean angle of arrival and an angular spread for each side.
Antenna correlation is synthesized for a half-wavelength uniform linear
array under a Gaussian power azimuth spectrum, using the standard
small-spread closed form

    R[p, q] = exp(i*pi*(p-q)*sin(theta)) * exp(-0.5*(pi*(p-q)*cos(theta)*s)**2)

for mean angle ``theta`` and spread ``s``.  The carrier frequency enters
only through the antenna spacing, fixed here at half a wavelength, so it is
not a runtime parameter.

A channel draw is the frequency-flat sum over paths

    H = sum_l (1/sqrt(t)) * C_r_l^{1/2} @ W_l @ C_t_l^{1/2}

with ``W_l`` i.i.d. circular complex Gaussian (unit variance per entry) and
independent across paths.  Randomness comes from a counter-based generator
keyed by ``(seed, trial)``: the draw for a given trial is the same no matter
how trials are batched or scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPsdError
from .matrix_core import PSD_REL_TOL, hermitize, psd_sqrt

__all__ = [
    "PathCluster",
    "ChannelStats",
    "correlation_from_cluster",
    "build_stats",
    "isotropic_stats",
    "channel_rng",
    "sample_paths",
    "sample_channel",
]

_SEED_MASK = (1 << 64) - 1


def _check_positive_definite(c: np.ndarray, what: str) -> None:
    """Reject matrices that are indefinite beyond eigensolver roundoff.

    Strongly correlated arrays (small angular spreads, many antennas) have
    true minimum eigenvalues below machine epsilon; the computed one can
    come back as a tiny negative.  That is accepted -- entries are never
    altered -- while anything below the relative roundoff band raises.
    """
    w = np.linalg.eigvalsh(c)
    wmin = float(w.min())
    scale = float(np.max(np.abs(w)))
    if wmin < -PSD_REL_TOL * scale:
        raise NotPsdError(
            f"{what} is not positive definite "
            f"(min eigenvalue {wmin:.6e}, scale {scale:.6e})")


@dataclass(frozen=True)
class PathCluster:
    """Angular description of one scatterer cluster.

    Angles are in radians; ``power`` is the relative path power (the list of
    powers is normalized to unit sum when statistics are built).
    """

    mean_aod: float
    aod_spread: float
    mean_aoa: float
    aoa_spread: float
    power: float = 1.0

    def __post_init__(self):
        if not (self.aod_spread > 0 and self.aoa_spread > 0):
            raise ValueError("angle spreads must be positive")
        if not self.power >= 0:
            raise ValueError("path power must be non-negative")


@dataclass(frozen=True, eq=False)
class ChannelStats:
    """Second-order channel description: per-path correlation pairs.

    ``C_r[l]`` is the ``r x r`` receive-side and ``C_t[l]`` the ``t x t``
    transmit-side correlation matrix of path ``l``; all must be positive
    definite.  ``sigma2`` is the noise power.
    """

    r: int
    t: int
    C_r: tuple
    C_t: tuple
    sigma2: float

    def __post_init__(self):
        if self.r < 1 or self.t < 1:
            raise ValueError("antenna counts must be >= 1")
        if not self.sigma2 > 0:
            raise ValueError("noise power sigma2 must be positive")
        if len(self.C_r) != len(self.C_t) or len(self.C_r) == 0:
            raise ValueError("need one (C_r, C_t) pair per path, at least one path")
        object.__setattr__(self, "C_r", tuple(hermitize(c) for c in self.C_r))
        object.__setattr__(self, "C_t", tuple(hermitize(c) for c in self.C_t))
        for side, mats, dim in (("receive", self.C_r, self.r),
                                ("transmit", self.C_t, self.t)):
            for l, c in enumerate(mats):
                if c.shape != (dim, dim):
                    raise ValueError(
                        f"{side} matrix of path {l} has shape {c.shape}, "
                        f"expected {(dim, dim)}")
                _check_positive_definite(
                    c, f"{side} matrix of path {l}")
        # stacked (L, n, n) views for batched trace work in solver hot loops
        object.__setattr__(self, "_cr_stack", np.stack(self.C_r))
        object.__setattr__(self, "_ct_stack", np.stack(self.C_t))

    @property
    def L(self) -> int:
        return len(self.C_r)

    def cr_stack(self) -> np.ndarray:
        """Receive-side matrices as one ``(L, r, r)`` array (do not mutate)."""
        return self._cr_stack

    def ct_stack(self) -> np.ndarray:
        """Transmit-side matrices as one ``(L, t, t)`` array (do not mutate)."""
        return self._ct_stack

    def with_sigma2(self, sigma2: float) -> "ChannelStats":
        """Same correlation structure at a different noise power."""
        return ChannelStats(self.r, self.t, self.C_r, self.C_t, sigma2)


def correlation_from_cluster(n: int, mean_angle: float, spread: float) -> np.ndarray:
    """Antenna correlation matrix of one cluster for an ``n``-element ULA.

    Unit diagonal by construction and positive definite up to eigensolver
    roundoff (tight spreads on large arrays push the smallest eigenvalue
    below machine epsilon).  Raises :class:`NotPsdError` if the result is
    indefinite beyond the roundoff band; entries are never adjusted.
    """
    if n < 1:
        raise ValueError("antenna count must be >= 1")
    if not spread > 0:
        raise ValueError("angle spread must be positive")
    d = np.arange(n)[:, None] - np.arange(n)[None, :]
    phase = np.exp(1j * np.pi * d * math.sin(mean_angle))
    damp = np.exp(-0.5 * (np.pi * d * math.cos(mean_angle) * spread) ** 2)
    c = hermitize(phase * damp)
    _check_positive_definite(
        c, f"correlation (mean angle {mean_angle}, spread {spread})")
    return c


def build_stats(clusters, r: int, t: int, sigma2: float) -> ChannelStats:
    """Channel statistics from a list of :class:`PathCluster`.

    Path powers are normalized to unit sum and applied on the transmit side
    as ``C_t_l = power_l * L * R_t_l``, so equal powers reproduce the plain
    unit-diagonal correlation matrices.
    """
    clusters = list(clusters)
    if not clusters:
        raise ValueError("need at least one cluster")
    powers = np.array([c.power for c in clusters], dtype=float)
    total = float(powers.sum())
    if not total > 0:
        raise ValueError("total path power must be positive")
    weights = powers / total
    L = len(clusters)
    C_r = [correlation_from_cluster(r, c.mean_aoa, c.aoa_spread) for c in clusters]
    C_t = [weights[l] * L * correlation_from_cluster(t, clusters[l].mean_aod,
                                                     clusters[l].aod_spread)
           for l in range(L)]
    return ChannelStats(r, t, tuple(C_r), tuple(C_t), float(sigma2))


def isotropic_stats(r: int, t: int, L: int = 1, sigma2: float = 1.0) -> ChannelStats:
    """Statistics with identity correlation on both sides of every path."""
    eye_r = np.eye(r, dtype=complex)
    eye_t = np.eye(t, dtype=complex)
    return ChannelStats(r, t, (eye_r,) * L, (eye_t,) * L, float(sigma2))


def channel_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Counter-based random stream for one ``(seed, trial)`` pair.

    Distinct trials get statistically independent streams; a given pair
    always yields the same stream, regardless of how many other trials run
    or in which order.
    """
    if trial < 0:
        raise ValueError("trial index must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed) & _SEED_MASK,
                                spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def path_factors(stats: ChannelStats):
    """PSD square roots of the per-path correlation pairs (precomputable)."""
    sqrt_r = [psd_sqrt(c) for c in stats.C_r]
    sqrt_t = [psd_sqrt(c) for c in stats.C_t]
    return sqrt_r, sqrt_t


def draw_paths(gen: np.random.Generator, sqrt_r, sqrt_t, t: int) -> list:
    """Per-path channel matrices drawn from ``gen`` (path-major draw order)."""
    scale = 1.0 / math.sqrt(t)
    out = []
    for a, b in zip(sqrt_r, sqrt_t):
        z = gen.standard_normal((a.shape[0], t, 2))
        w = (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)
        out.append(scale * (a @ w @ b))
    return out


def sample_paths(stats: ChannelStats, seed: int, trial: int = 0) -> list:
    """One independent draw of every per-path matrix ``H_l``."""
    sqrt_r, sqrt_t = path_factors(stats)
    return draw_paths(channel_rng(seed, trial), sqrt_r, sqrt_t, stats.t)


def sample_channel(stats: ChannelStats, seed: int, trial: int = 0) -> np.ndarray:
    """One draw of the summed ``r x t`` channel ``H = sum_l H_l``.

    Deterministic given ``(stats, seed, trial)``.
    """
    paths = sample_paths(stats, seed, trial)
    h = paths[0]
    for p in paths[1:]:
        h = h + p
    return h
