"""Large-system approximation of the ergodic mutual information (EMI).

For a covariance ``Q`` in the normalized-trace feasible set ``C_1`` the
approximation is, with ``(delta, delta_tilde)`` the canonical fixed point
at ``Q``,

    emi(Q) = log det(I + sum_l delta_tilde_l * C_r_l)
           + log det(I + Q^{1/2} (sum_l delta_l * C_t_l) Q^{1/2})
           - sigma2 * t * sum_l delta_l * delta_tilde_l        [nats].

The second log-det is evaluated on the symmetrized form (the determinant is
the same as for ``I + Q C_tilde``), which keeps the eigensolver on Hermitian
matrices.  The module also provides the same expression at arbitrary
non-negative weight vectors (:func:`emi_surrogate`) and the directional
(Gateaux) derivative used by the optimality certificates
(:func:`directional_derivative`).

All values are in nats; unit conversion happens only at the CLI boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical_solver import (CanonicalSolution, SolverOptions,
                               receive_combination, solve_canonical,
                               transmit_combination)
from .channel_model import ChannelStats
from .errors import NotPsdError
from .matrix_core import PSD_REL_TOL, hermitize, log_det_i_plus, psd_sqrt

__all__ = [
    "TRACE_TOL",
    "covariance_matrix",
    "uniform_covariance",
    "random_covariance",
    "EmiValue",
    "emi_approx",
    "emi_surrogate",
    "directional_derivative",
]

#: Allowed deviation of (1/t) Tr(Q) from one.
TRACE_TOL = 1e-12


def covariance_matrix(Q) -> np.ndarray:
    """Validate an input covariance against the feasible set ``C_1``.

    The Hermitian part of ``Q`` is taken, eigenvalues in
    ``[-PSD_REL_TOL * ||Q||, 0)`` are clamped to zero, and the normalized
    trace must equal one within :data:`TRACE_TOL`.  Returns the cleaned-up
    matrix; raises :class:`NotPsdError` or :class:`ValueError` otherwise.
    """
    q = hermitize(Q)
    if not np.all(np.isfinite(q)):
        raise ValueError("covariance contains non-finite entries")
    t = q.shape[0]
    w, u = np.linalg.eigh(q)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if float(w.min()) < -PSD_REL_TOL * scale:
        raise NotPsdError(
            f"covariance is not PSD: min eigenvalue {w.min():.6e} "
            f"(scale {scale:.6e})")
    if float(w.min()) < 0.0:
        w = np.clip(w, 0.0, None)
        q = hermitize((u * w) @ u.conj().T)
    trace_dev = abs(np.trace(q).real / t - 1.0)
    if trace_dev > TRACE_TOL:
        raise ValueError(
            f"normalized trace deviates from 1 by {trace_dev:.3e} "
            f"(allowed {TRACE_TOL:.0e})")
    return q


def uniform_covariance(t: int) -> np.ndarray:
    """The identity covariance (uniform power allocation)."""
    return np.eye(t, dtype=complex)


def random_covariance(t: int, seed) -> np.ndarray:
    """Deterministic pseudo-random element of ``C_1`` (full rank a.s.)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    a = rng.standard_normal((t, t)) + 1j * rng.standard_normal((t, t))
    q = a @ a.conj().T
    q *= t / np.trace(q).real
    return hermitize(q)


@dataclass(frozen=True, eq=False)
class EmiValue:
    """EMI approximation in nats, with the fixed point that produced it."""

    value: float
    solution: CanonicalSolution


def emi_approx(stats: ChannelStats, Q=None,
               opts: SolverOptions | None = None) -> EmiValue:
    """Evaluate the large-system EMI approximation at covariance ``Q``.

    ``Q=None`` means the identity (uniform allocation).  Propagates
    :class:`NonConvergenceError` from the fixed-point solver.
    """
    sol = solve_canonical(stats, Q, opts)
    value = emi_surrogate(stats, Q, sol.delta, sol.delta_tilde)
    return EmiValue(value, sol)


def emi_surrogate(stats: ChannelStats, Q, delta, delta_tilde) -> float:
    """The EMI expression at arbitrary non-negative weight vectors.

    Equals :func:`emi_approx` when ``(delta, delta_tilde)`` is the canonical
    fixed point at ``Q``; away from it, the partial derivative with respect
    to ``delta_l`` is ``-sigma2 * t * (transmit_update(delta, Q)_l -
    delta_tilde_l)`` and symmetrically for ``delta_tilde_l``.
    """
    delta = np.asarray(delta, dtype=float)
    delta_tilde = np.asarray(delta_tilde, dtype=float)
    if np.any(delta < 0) or np.any(delta_tilde < 0):
        raise ValueError("weight vectors must be entrywise non-negative")
    first = log_det_i_plus(receive_combination(stats, delta_tilde))
    c_tilde = transmit_combination(stats, delta)
    if Q is None:
        inner = c_tilde
    else:
        s = psd_sqrt(Q)
        inner = hermitize(s @ c_tilde @ s)
    second = log_det_i_plus(inner)
    cross = stats.sigma2 * stats.t * float(np.dot(delta, delta_tilde))
    return first + second - cross


def directional_derivative(stats: ChannelStats, Q, P,
                           opts: SolverOptions | None = None,
                           solution: CanonicalSolution | None = None) -> float:
    """Gateaux derivative of the EMI approximation at ``Q`` toward ``P``.

    Because the weight-vector sensitivities vanish at the canonical fixed
    point, the derivative reduces to the frozen-weights expression

        Tr[ (I + Q C_tilde)^{-1} (P - Q) C_tilde ],

    with ``C_tilde = sum_l delta_l(Q) * C_t_l``.  At a maximizer the value
    is <= 0 for every feasible ``P``.

    Pass ``solution`` (the canonical solution at ``Q``) to skip the
    fixed-point solve when probing many directions from the same point.
    """
    t = stats.t
    q = uniform_covariance(t) if Q is None else np.asarray(Q, dtype=complex)
    p = np.asarray(P, dtype=complex)
    sol = solution if solution is not None else solve_canonical(stats, Q, opts)
    c_tilde = transmit_combination(stats, sol.delta)
    a = np.eye(t, dtype=complex) + q @ c_tilde
    m = np.linalg.solve(a.T, c_tilde.T).T  # = C_tilde @ inv(I + Q C_tilde)
    return float(np.einsum("ij,ji->", m, p - q).real)
