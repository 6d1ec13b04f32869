"""Capacity-achieving input covariance for correlated MIMO channels.

The library evaluates a large-system approximation of the ergodic mutual
information of frequency-selective, Kronecker-correlated Rayleigh MIMO
channels, solves the coupled fixed-point system behind it, maximizes the
approximation over normalized-trace input covariances by iterative
waterfilling, and validates everything against Monte-Carlo estimates of the
true ergodic mutual information.

Typical use::

    from mimo_capacity import five_cluster_stats, optimize_covariance, emi_mc

    stats = five_cluster_stats(r=4, t=4, sigma2=0.1)
    report = optimize_covariance(stats)
    estimate = emi_mc(stats, report.Q_star, trials=100_000, seed=1)

All internal values are in nats; the CLI converts to bits on request.
"""

from .errors import (ConfigError, DegenerateDirectionError, EigenSolverError,
                     MimoCapacityError, NonConvergenceError, NotPosDefError,
                     NotPsdError)
from .matrix_core import (EigDecomposition, hermitian_eig, hermitize,
                          hpd_inverse, log_det_i_plus, psd_sqrt,
                          spectral_radius_nonneg)
from .channel_model import (ChannelStats, PathCluster, build_stats,
                            channel_rng, correlation_from_cluster,
                            isotropic_stats, sample_channel, sample_paths)
from .canonical_solver import (CanonicalSolution, SolverOptions,
                               contraction_radius, receive_combination,
                               receive_update, solve_canonical,
                               transmit_combination, transmit_update)
from .emi_approx import (EmiValue, covariance_matrix, directional_derivative,
                         emi_approx, emi_surrogate, random_covariance,
                         uniform_covariance)
from .monte_carlo import EmiEstimate, EmiGap, emi_gap, emi_mc, resolve_workers
from .optimizer import (OptimizeReport, WaterfillResult, covariance_projection,
                        optimize_covariance, project_simplex,
                        reference_maximizer, restart_policy, waterfill)
from .presets import five_cluster_clusters, five_cluster_stats

__version__ = "0.1.0"

__all__ = [
    "MimoCapacityError", "NotPsdError", "NotPosDefError", "EigenSolverError",
    "DegenerateDirectionError", "NonConvergenceError", "ConfigError",
    "EigDecomposition", "hermitize", "hermitian_eig", "psd_sqrt",
    "log_det_i_plus", "hpd_inverse", "spectral_radius_nonneg",
    "PathCluster", "ChannelStats", "correlation_from_cluster", "build_stats",
    "isotropic_stats", "channel_rng", "sample_paths", "sample_channel",
    "SolverOptions", "CanonicalSolution", "receive_combination",
    "transmit_combination", "receive_update", "transmit_update",
    "solve_canonical", "contraction_radius",
    "EmiValue", "covariance_matrix", "uniform_covariance", "random_covariance",
    "emi_approx", "emi_surrogate", "directional_derivative",
    "EmiEstimate", "EmiGap", "emi_mc", "emi_gap", "resolve_workers",
    "WaterfillResult", "OptimizeReport", "waterfill", "project_simplex",
    "covariance_projection", "optimize_covariance", "restart_policy",
    "reference_maximizer",
    "five_cluster_clusters", "five_cluster_stats",
    "__version__",
]
