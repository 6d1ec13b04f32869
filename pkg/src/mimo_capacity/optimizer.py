"""Maximization of the EMI approximation over normalized-trace covariances.

Two independent maximizers of the same strictly concave objective:

* :func:`optimize_covariance` -- the iterative waterfilling scheme.  Each
  outer step solves the canonical fixed point at the current covariance and
  then waterfills on the weighted transmit combination; the loop stops when
  successive fixed-point vectors agree to ``outer_tol`` in sup norm.  If the
  cap is hit, a deterministic restart schedule can re-seed the initial
  covariance.

* :func:`reference_maximizer` -- projected gradient ascent with Armijo
  backtracking, used to cross-validate the waterfilling answer.  Gradient
  from the frozen-weights derivative; feasibility by eigendecomposition and
  Euclidean projection of the eigenvalue vector onto the scaled simplex.

Waterfilling itself uses the exact sorted active-set closed form (no
bisection), so its output is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical_solver import (SolverOptions, _fixed_point, solve_canonical,
                               transmit_combination)
from .channel_model import ChannelStats
from .errors import DegenerateDirectionError, NonConvergenceError
from .matrix_core import hermitize, hermitian_eig
from .emi_approx import emi_surrogate, random_covariance, uniform_covariance

__all__ = [
    "EIG_FLOOR",
    "WaterfillResult",
    "OptimizeReport",
    "waterfill",
    "project_simplex",
    "covariance_projection",
    "optimize_covariance",
    "restart_policy",
    "reference_maximizer",
]

#: Eigenvalues of the waterfilling direction at or below this are treated as
#: null modes and receive zero power (they contribute nothing to the
#: objective).
EIG_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class WaterfillResult:
    """Closed-form waterfilling solution.

    ``Q`` shares the eigenvectors of the input direction; mode ``i`` gets
    power ``max(water_level - 1/lambda_i, 0)`` and null modes get zero.
    """

    Q: np.ndarray
    water_level: float
    active_count: int


@dataclass(frozen=True, eq=False)
class OptimizeReport:
    """Outcome of a covariance optimization run.

    ``delta_history_residuals`` records the sup-norm differences of
    successive fixed-point vectors (the stopping quantity);
    ``emi_history`` the objective value at the start of each outer step.
    """

    Q_star: np.ndarray
    emi_approx_value: float
    outer_iterations: int
    delta_history_residuals: np.ndarray
    converged: bool
    restarts: int
    emi_history: np.ndarray


def waterfill(C_tilde, total_power: float | None = None) -> WaterfillResult:
    """Maximize ``log det(I + Q C_tilde)`` subject to ``Tr Q = total_power``.

    Exact KKT solution: eigendecompose the direction, pick the water level
    by the sorted active-set closed form, and rebuild.  ``total_power``
    defaults to the dimension (normalized-trace convention).

    Raises :class:`DegenerateDirectionError` when every eigenvalue is at or
    below :data:`EIG_FLOOR` (any feasible ``Q`` is then optimal).
    """
    w, u = hermitian_eig(C_tilde)
    t = w.size
    budget = float(total_power) if total_power is not None else float(t)
    if not budget > 0:
        raise ValueError("total power must be positive")

    order = np.argsort(w)[::-1]  # strongest mode first
    lam = w[order]
    usable = lam > EIG_FLOOR
    n_usable = int(np.count_nonzero(usable))
    if n_usable == 0:
        raise DegenerateDirectionError(
            f"all eigenvalues <= {EIG_FLOOR:g}; direction carries no modes")

    inv_lam = 1.0 / lam[:n_usable]
    csum = np.cumsum(inv_lam)
    active = 0
    mu = 0.0
    for k in range(1, n_usable + 1):
        cand = (budget + csum[k - 1]) / k
        if cand > inv_lam[k - 1]:
            active, mu = k, cand
        else:
            break

    q = np.zeros(t)
    q[order[:active]] = mu - inv_lam[:active]
    q *= budget / q.sum()  # remove the last ulp of drift
    Q = hermitize((u * q) @ u.conj().T)
    return WaterfillResult(Q=Q, water_level=mu, active_count=active)


def project_simplex(v, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{x >= 0, sum(x) = total}``."""
    v = np.asarray(v, dtype=float)
    if not total > 0:
        raise ValueError("total must be positive")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    feasible = u - (css - total) / idx > 0
    rho = int(np.nonzero(feasible)[0][-1])
    tau = (css[rho] - total) / (rho + 1)
    return np.maximum(v - tau, 0.0)


def covariance_projection(m, t: int) -> np.ndarray:
    """Euclidean projection of a Hermitian matrix onto the feasible set.

    Eigendecompose and project the eigenvalue vector onto the scaled simplex
    ``{q >= 0, sum q = t}``; this is the exact projection onto the set of
    PSD matrices with ``Tr Q = t``.
    """
    w, u = hermitian_eig(m)
    q = project_simplex(w, float(t))
    return hermitize((u * q) @ u.conj().T)


def _delta_sup_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def optimize_covariance(stats: ChannelStats, outer_tol: float = 1e-8,
                        max_outer: int = 100,
                        solver_opts: SolverOptions | None = None,
                        max_restarts: int = 0) -> OptimizeReport:
    """Iterative waterfilling maximization of the EMI approximation.

    Starting from the identity, step ``k`` solves the canonical fixed point
    at the current covariance and waterfills on the induced transmit
    combination.  Stops when both fixed-point vectors move less than
    ``outer_tol`` in sup norm between steps; on success the result is the
    unique maximizer (up to tolerance).

    If ``max_outer`` steps do not meet the criterion, up to ``max_restarts``
    deterministic restarts (see :func:`restart_policy`) are attempted before
    raising :class:`NonConvergenceError`.
    """
    solver_opts = solver_opts or SolverOptions()
    t = stats.t

    total_outer = 0
    diffs: list[float] = []
    emi_values: list[float] = []

    for attempt in range(max_restarts + 1):
        if attempt == 0:
            Q = uniform_covariance(t)
        else:
            Q = restart_policy(stats, attempt, last_delta=prev_delta)
        prev_delta = None
        prev_delta_tilde = None
        for _ in range(max_outer):
            # warm-start each fixed point from the previous outer iterate
            start = (np.full(stats.L, solver_opts.init_delta),) * 2 \
                if prev_delta is None else (prev_delta, prev_delta_tilde)
            delta, delta_tilde, _, _ = _fixed_point(
                stats, Q, start[0], start[1],
                solver_opts.tol, solver_opts.max_iter)
            emi_values.append(emi_surrogate(stats, Q, delta, delta_tilde))
            total_outer += 1
            wf = waterfill(transmit_combination(stats, delta), float(t))
            if prev_delta is not None:
                diff = max(_delta_sup_diff(delta, prev_delta),
                           _delta_sup_diff(delta_tilde, prev_delta_tilde))
                diffs.append(diff)
                if diff <= outer_tol:
                    final = solve_canonical(stats, wf.Q, solver_opts)
                    value = emi_surrogate(stats, wf.Q, final.delta,
                                          final.delta_tilde)
                    return OptimizeReport(
                        Q_star=wf.Q, emi_approx_value=value,
                        outer_iterations=total_outer,
                        delta_history_residuals=np.array(diffs),
                        converged=True, restarts=attempt,
                        emi_history=np.array(emi_values))
            prev_delta, prev_delta_tilde = delta, delta_tilde
            Q = wf.Q

    raise NonConvergenceError(
        f"outer loop did not meet tol={outer_tol} within {max_outer} steps "
        f"and {max_restarts} restart(s)",
        delta=prev_delta, delta_tilde=prev_delta_tilde,
        residual=diffs[-1] if diffs else np.inf,
        iterations=total_outer, history=np.array(diffs))


def restart_policy(stats: ChannelStats, attempt: int, last_delta=None) -> np.ndarray:
    """Deterministic restart covariance for a stalled outer loop.

    Attempt 1 waterfills on the transmit combination of the last iterate's
    ``delta`` and averages with the identity; later attempts return a
    pseudo-random feasible point seeded by the attempt number.  Identical
    inputs always give identical outputs.
    """
    if attempt < 1:
        raise ValueError("attempt must be >= 1")
    if attempt == 1:
        if last_delta is None:
            raise ValueError("attempt 1 needs the last iterate's delta")
        wf = waterfill(transmit_combination(stats, last_delta), float(stats.t))
        return hermitize(0.5 * (wf.Q + uniform_covariance(stats.t)))
    return random_covariance(stats.t, seed=attempt)


def _warm_vectors(stats, Q, warm, opts):
    """Fixed-point vectors at ``Q``, warm-started from ``warm`` if given."""
    if warm is None:
        sol = solve_canonical(stats, Q, opts)
        return sol.delta, sol.delta_tilde
    delta, delta_tilde, _, _ = _fixed_point(
        stats, Q, warm[0], warm[1], opts.tol, opts.max_iter)
    return delta, delta_tilde


def reference_maximizer(stats: ChannelStats, tol: float = 1e-6,
                        max_iter: int = 5000,
                        solver_opts: SolverOptions | None = None) -> OptimizeReport:
    """Projected gradient ascent on the EMI approximation (oracle path).

    Independent of the waterfilling scheme: ascends the frozen-weights
    gradient ``herm(C_tilde (I + Q C_tilde)^{-1})`` with Armijo
    backtracking, projecting each trial point back onto the feasible set.
    Stops when ``||proj(Q + grad) - Q||_F <= tol``.
    """
    solver_opts = solver_opts or SolverOptions()
    t = stats.t
    eye = np.eye(t, dtype=complex)

    Q = uniform_covariance(t)
    vecs = _warm_vectors(stats, Q, None, solver_opts)
    value = emi_surrogate(stats, Q, vecs[0], vecs[1])

    step = 1.0
    pg_history: list[float] = []
    values = [value]

    for it in range(1, max_iter + 1):
        c_tilde = transmit_combination(stats, vecs[0])
        a = eye + Q @ c_tilde
        grad = hermitize(np.linalg.solve(a.T, c_tilde.T).T)

        pg = covariance_projection(Q + grad, t) - Q
        pg_norm = float(np.linalg.norm(pg))
        pg_history.append(pg_norm)
        if pg_norm <= tol:
            return OptimizeReport(
                Q_star=Q, emi_approx_value=value, outer_iterations=it,
                delta_history_residuals=np.array(pg_history),
                converged=True, restarts=0, emi_history=np.array(values))

        s = step
        while True:
            q_trial = covariance_projection(Q + s * grad, t)
            move = q_trial - Q
            gain_lin = float(np.einsum("ij,ji->", grad, move).real)
            trial_vecs = _warm_vectors(stats, q_trial, vecs, solver_opts)
            trial_value = emi_surrogate(stats, q_trial, trial_vecs[0],
                                        trial_vecs[1])
            if trial_value >= value + 1e-4 * gain_lin or s < 1e-14:
                break
            s *= 0.5
        if trial_value < value and s < 1e-14:
            break  # no ascent step left at this point
        Q, value, vecs = q_trial, trial_value, trial_vecs
        values.append(value)
        step = min(2.0 * s, 1e3)

    pg_norm = pg_history[-1] if pg_history else np.inf
    raise NonConvergenceError(
        f"projected gradient did not reach tol={tol} within {max_iter} "
        f"iterations (last projected-gradient norm {pg_norm:.3e})",
        residual=pg_norm, iterations=max_iter,
        history=np.array(pg_history))
