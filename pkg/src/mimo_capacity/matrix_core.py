"""Dense complex Hermitian linear-algebra primitives.

Everything here operates on plain ``numpy`` arrays.  Matrices *produced* by
this module are exactly Hermitian: each constructor ends with an explicit
symmetrization so that downstream algebra can rely on
``M[i, j] == conj(M[j, i])`` holding bit-for-bit.  Inputs are interpreted
through their Hermitian part, which makes the routines insensitive to the
tiny conjugate-asymmetry that BLAS products can leave behind.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import EigenSolverError, NotPosDefError, NotPsdError

__all__ = [
    "EigDecomposition",
    "hermitize",
    "hermitian_eig",
    "psd_sqrt",
    "log_det_i_plus",
    "hpd_inverse",
    "spectral_radius_nonneg",
]

#: Relative eigenvalue tolerance below which negative eigenvalues of a
#: nominally PSD matrix are treated as rounding noise and clamped to zero.
PSD_REL_TOL = 1e-10


class EigDecomposition(NamedTuple):
    """Spectral factorization ``M = U diag(w) U^H`` with ``w`` ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitize(m) -> np.ndarray:
    """Return the Hermitian part ``(M + M^H) / 2`` as a new complex array.

    The result satisfies ``out[i, j] == conj(out[j, i])`` exactly, not just
    up to rounding, because both entries are computed from the same two
    floating-point sums.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m + m.conj().T)


def _check_finite(m: np.ndarray) -> None:
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")


def hermitian_eig(m) -> EigDecomposition:
    """Eigen-decompose a Hermitian matrix.

    Eigenvalues are sorted ascending.  Each eigenvector is phase-rotated so
    that its first component of non-negligible magnitude is real and
    non-negative, which pins down the decomposition (up to degenerate
    subspaces) and makes outputs reproducible across runs.

    Parameters
    ----------
    m : array_like
        Square matrix; its Hermitian part is decomposed.

    Returns
    -------
    EigDecomposition
        ``eigenvalues`` (real, ascending) and ``eigenvectors`` (unitary,
        one eigenvector per column).
    """
    h = hermitize(m)
    _check_finite(h)
    try:
        w, u = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        resid = float(np.max(np.abs(h))) if h.size else 0.0
        raise EigenSolverError(
            f"eigensolver did not converge (input scale {resid:.3e}): {exc}"
        ) from exc
    return EigDecomposition(w, _canonical_phases(u))


def _canonical_phases(u: np.ndarray) -> np.ndarray:
    """Rotate each column so its leading significant entry is real >= 0."""
    u = np.array(u, dtype=complex)
    for k in range(u.shape[1]):
        col = u[:, k]
        mags = np.abs(col)
        top = mags.max()
        if top == 0.0:
            continue
        lead = int(np.argmax(mags > 1e-8 * top))
        pivot = col[lead]
        if pivot != 0:
            col *= np.conj(pivot) / np.abs(pivot)
            col[lead] = abs(pivot)
    return u


def psd_sqrt(m) -> np.ndarray:
    """Hermitian PSD square root ``S`` with ``S @ S == M`` up to rounding.

    Eigenvalues in ``[-PSD_REL_TOL * ||M||, 0)`` are clamped to zero;
    anything more negative raises :class:`NotPsdError`.
    """
    w, u = hermitian_eig(m)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    floor = -PSD_REL_TOL * scale
    wmin = float(w.min()) if w.size else 0.0
    if wmin < floor:
        raise NotPsdError(
            f"matrix is not PSD: min eigenvalue {wmin:.6e} < {floor:.6e}"
        )
    w = np.clip(w, 0.0, None)
    return hermitize((u * np.sqrt(w)) @ u.conj().T)


def log_det_i_plus(m) -> float:
    """``log det(I + M)`` in nats for a Hermitian ``M``.

    Computed as ``sum(log1p(eigenvalues))``, which stays accurate for large
    dimensions and for eigenvalues close to zero.  Raises
    :class:`NotPosDefError` when ``I + M`` is not positive definite.
    """
    h = hermitize(m)
    _check_finite(h)
    w = np.linalg.eigvalsh(h)
    if w.size and float(w.min()) <= -1.0:
        raise NotPosDefError(
            f"I + M is not positive definite (min eigenvalue of M = {w.min():.6e})"
        )
    return float(np.sum(np.log1p(w)))


def hpd_inverse(m) -> np.ndarray:
    """Inverse of a Hermitian positive-definite matrix via Cholesky."""
    h = hermitize(m)
    _check_finite(h)
    try:
        c, low = scipy.linalg.cho_factor(h, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPosDefError(f"matrix is not positive definite: {exc}") from exc
    eye = np.eye(h.shape[0], dtype=complex)
    return hermitize(scipy.linalg.cho_solve((c, low), eye, check_finite=False))


def spectral_radius_nonneg(m, rel_tol: float = 1e-12,
                           max_iter: int = 100_000) -> float:
    """Largest eigenvalue modulus of an entrywise non-negative square matrix.

    Power iteration started from the all-ones vector; the Perron root of a
    non-negative matrix equals its spectral radius, so the iteration tracks
    the right quantity.  On stagnation (e.g. periodic structure making the
    estimates oscillate) the dense eigensolver is used instead, so the call
    always returns.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    if a.size and float(a.min()) < 0.0:
        raise ValueError("matrix has negative entries")

    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])

    x = np.ones(n)
    est = np.inf
    prev = np.inf
    prev2 = np.inf
    for _ in range(max_iter):
        y = a @ x
        top = float(y.max())
        if top == 0.0:
            break  # all-ones start: a zero image means no growth to track
        prev2, prev, est = prev, est, top
        x = y / top
        if np.isfinite(prev) and abs(est - prev) <= rel_tol * max(1.0, est):
            return est
        if (np.isfinite(prev2) and abs(est - prev2) <= rel_tol * max(1.0, est)
                and abs(est - prev) > 1e-6 * max(1.0, est)):
            break  # period-2 oscillation: hand over to the dense solver
    w = np.linalg.eigvals(a)
    return float(np.max(np.abs(w))) if w.size else 0.0
