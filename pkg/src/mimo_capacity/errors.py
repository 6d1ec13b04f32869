"""Exception types shared by the numeric modules."""

from __future__ import annotations


class MimoCapacityError(Exception):
    """Base class for all library-specific errors."""


class NotPsdError(MimoCapacityError):
    """A matrix required to be positive semidefinite is not."""


class NotPosDefError(MimoCapacityError):
    """A matrix required to be positive definite is not."""


class EigenSolverError(MimoCapacityError):
    """The dense eigensolver failed to converge."""


class DegenerateDirectionError(MimoCapacityError):
    """A waterfilling direction has no usable modes (all eigenvalues ~ 0)."""


class ConfigError(MimoCapacityError):
    """Invalid scenario configuration, option or input file."""


class NonConvergenceError(MimoCapacityError):
    """An iterative solver hit its iteration cap before meeting tolerance.

    The last iterate travels with the exception so callers can inspect it,
    report it, or use it to build a restart point.
    """

    def __init__(self, message, *, delta=None, delta_tilde=None,
                 residual=None, iterations=None, history=None):
        super().__init__(message)
        self.delta = delta
        self.delta_tilde = delta_tilde
        self.residual = residual
        self.iterations = iterations
        self.history = history
