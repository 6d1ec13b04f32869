"""Fixed-point solver for the coupled per-path trace equations.

For channel statistics with ``L`` paths and an input covariance ``Q`` with
normalized trace, the large-system description is parameterized by two
positive vectors ``delta`` and ``delta_tilde`` of length ``L`` solving

    delta_l       = (1/t) Tr[ C_r_l @ T ],
    delta_tilde_l = (1/t) Tr[ Q^{1/2} C_t_l Q^{1/2} @ T_tilde ],

where

    T       = [ sigma2 * (I_r + sum_j delta_tilde_j * C_r_j) ]^{-1},
    T_tilde = [ sigma2 * (I_t + sum_j delta_j * Q^{1/2} C_t_j Q^{1/2}) ]^{-1}.

The system has a unique positive solution, reached from any positive start
by the plain fixed-point sweep implemented here.  The transmit-side map is
evaluated through the equivalent form

    delta_tilde_l = Tr[ C_t_l @ Q @ (I + C_tilde(delta) @ Q)^{-1} ] / (sigma2 * t),

which stays well defined when ``Q`` is singular (waterfilling routinely
zeroes eigenvalues), avoiding square roots of singular matrices inside the
inverse.

The solver's residual is the *equation mismatch* of the returned iterate,
not the successive-iterate distance, so a returned solution certifies an
actual approximate root even under slow contraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel_model import ChannelStats
from .errors import NonConvergenceError
from .matrix_core import hermitize, hpd_inverse, psd_sqrt, spectral_radius_nonneg

__all__ = [
    "SolverOptions",
    "CanonicalSolution",
    "receive_combination",
    "transmit_combination",
    "receive_resolvent",
    "receive_update",
    "transmit_update",
    "solve_canonical",
    "contraction_radius",
]


@dataclass(frozen=True)
class SolverOptions:
    """Stopping controls for :func:`solve_canonical`.

    ``tol`` bounds the relative sup-norm equation mismatch of the returned
    iterate; ``init_delta`` is the shared positive starting value for every
    component of both vectors.
    """

    tol: float = 1e-10
    max_iter: int = 10_000
    init_delta: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.init_delta > 0:
            raise ValueError("init_delta must be positive")


@dataclass(frozen=True, eq=False)
class CanonicalSolution:
    """Converged fixed point plus the matrices it induces."""

    delta: np.ndarray
    delta_tilde: np.ndarray
    T: np.ndarray
    T_tilde: np.ndarray
    iterations: int
    residual: float


def receive_combination(stats: ChannelStats, delta_tilde) -> np.ndarray:
    """Weighted receive-side sum ``sum_l delta_tilde_l * C_r_l``."""
    return np.tensordot(np.asarray(delta_tilde, dtype=float),
                        stats.cr_stack(), axes=1)


def transmit_combination(stats: ChannelStats, delta) -> np.ndarray:
    """Weighted transmit-side sum ``sum_l delta_l * C_t_l``."""
    return np.tensordot(np.asarray(delta, dtype=float),
                        stats.ct_stack(), axes=1)


def receive_resolvent(stats: ChannelStats, delta_tilde) -> np.ndarray:
    """``T = [sigma2 * (I + sum_j delta_tilde_j C_r_j)]^{-1}``."""
    m = stats.sigma2 * (np.eye(stats.r, dtype=complex)
                        + receive_combination(stats, delta_tilde))
    return hpd_inverse(m)


def receive_update(delta_tilde, stats: ChannelStats) -> np.ndarray:
    """Receive-side half of the fixed-point map.

    Returns the vector ``((1/t) Tr[C_r_l @ T(delta_tilde)])_l``; strictly
    positive for any entrywise non-negative input.
    """
    T = receive_resolvent(stats, delta_tilde)
    return np.einsum("lij,ji->l", stats.cr_stack(), T).real / stats.t


def transmit_update(delta, Q, stats: ChannelStats) -> np.ndarray:
    """Transmit-side half of the fixed-point map at covariance ``Q``.

    Evaluates ``Tr[C_t_l Q (I + C_tilde(delta) Q)^{-1}] / (sigma2 * t)``,
    valid for singular ``Q`` as well.  ``Q=None`` means the identity.
    """
    t = stats.t
    if Q is None:
        Q = np.eye(t, dtype=complex)
    a = np.eye(t, dtype=complex) + transmit_combination(stats, delta) @ Q
    b = np.linalg.solve(a.T, Q.T).T  # = Q @ inv(I + C_tilde Q)
    return np.einsum("lij,ji->l", stats.ct_stack(), b).real / (stats.sigma2 * t)


def _fixed_point(stats, Q, delta0, delta_tilde0, tol, max_iter):
    """Jacobi sweep from vector starts; returns (delta, delta_tilde, iters, residual).

    Inlines the two half-maps with batched linear algebra; numerically
    equivalent to composing :func:`receive_update` / :func:`transmit_update`.
    """
    t, s2 = stats.t, stats.sigma2
    cr, ct = stats.cr_stack(), stats.ct_stack()
    eye_r = np.eye(stats.r, dtype=complex)
    eye_t = np.eye(t, dtype=complex)
    q = eye_t if Q is None else np.asarray(Q, dtype=complex)

    delta = np.array(delta0, dtype=float)
    delta_tilde = np.array(delta_tilde0, dtype=float)
    residual = np.inf
    for it in range(max_iter + 1):
        T = np.linalg.solve(s2 * (eye_r + np.tensordot(delta_tilde, cr, 1)),
                            eye_r)
        f_val = np.einsum("lij,ji->l", cr, T).real / t
        a = eye_t + np.tensordot(delta, ct, 1) @ q
        b = np.linalg.solve(a.T, q.T).T  # = Q @ inv(I + C_tilde Q)
        ft_val = np.einsum("lij,ji->l", ct, b).real / (s2 * t)

        denom = max(1.0, float(np.max(np.abs(delta))),
                    float(np.max(np.abs(delta_tilde))))
        residual = max(float(np.max(np.abs(delta - f_val))),
                       float(np.max(np.abs(delta_tilde - ft_val)))) / denom
        if residual <= tol:
            return delta, delta_tilde, it, residual
        if it == max_iter:
            break
        delta, delta_tilde = f_val, ft_val
    raise NonConvergenceError(
        f"fixed point did not reach tol={tol} within {max_iter} iterations "
        f"(residual {residual:.3e})",
        delta=delta, delta_tilde=delta_tilde,
        residual=residual, iterations=max_iter)


def solve_canonical(stats: ChannelStats, Q=None,
                    opts: SolverOptions | None = None) -> CanonicalSolution:
    """Solve the coupled trace equations at covariance ``Q``.

    Parameters
    ----------
    stats : ChannelStats
        Channel second-order description.
    Q : array_like or None
        Normalized-trace PSD covariance; ``None`` means the identity.
    opts : SolverOptions, optional
        Tolerance and iteration controls.

    Returns
    -------
    CanonicalSolution
        Positive vectors ``delta``/``delta_tilde`` with relative equation
        mismatch at most ``opts.tol``, plus the induced ``T``/``T_tilde``.

    Raises
    ------
    NonConvergenceError
        If ``opts.max_iter`` updates do not reach the tolerance; the error
        carries the last iterate and its residual.
    """
    opts = opts or SolverOptions()
    L = stats.L
    start = np.full(L, float(opts.init_delta))
    delta, delta_tilde, iters, residual = _fixed_point(
        stats, Q, start, start, opts.tol, opts.max_iter)

    T = receive_resolvent(stats, delta_tilde)
    t = stats.t
    if Q is None:
        conj_ct = transmit_combination(stats, delta)
    else:
        s = psd_sqrt(Q)
        conj_ct = hermitize(s @ transmit_combination(stats, delta) @ s)
    T_tilde = hpd_inverse(stats.sigma2 * (np.eye(t, dtype=complex) + conj_ct))
    return CanonicalSolution(delta, delta_tilde, T, T_tilde, iters, residual)


def contraction_radius(sol: CanonicalSolution, stats: ChannelStats, Q=None) -> float:
    """Spectral radius of the linearized fixed-point update at a solution.

    Builds the L x L coupling matrices

        A[k, l]  = (1/t) Tr[C_r_k T C_r_l T],
        At[k, l] = (1/t) Tr[S_k T_tilde S_l T_tilde],   S_l = Q^{1/2} C_t_l Q^{1/2},

    and returns ``rho(sigma2^2 * At @ A)``.  The value is < 1 at any true
    solution, so it doubles as a convergence sanity check.
    """
    t = stats.t
    if Q is None:
        s_mats = list(stats.C_t)
    else:
        s = psd_sqrt(Q)
        s_mats = [hermitize(s @ c @ s) for c in stats.C_t]

    xr = [c @ sol.T for c in stats.C_r]
    xt = [m @ sol.T_tilde for m in s_mats]
    L = stats.L
    a = np.empty((L, L))
    at = np.empty((L, L))
    for k in range(L):
        for l in range(L):
            a[k, l] = np.einsum("ij,ji->", xr[k], xr[l]).real / t
            at[k, l] = np.einsum("ij,ji->", xt[k], xt[l]).real / t
    # traces of products of PSD congruences; negatives can only be roundoff
    a = np.clip(a, 0.0, None)
    at = np.clip(at, 0.0, None)
    return spectral_radius_nonneg(stats.sigma2 ** 2 * (at @ a))
