"""Bundled scenario presets.

``five_cluster_clusters`` ships the five-path angular scenario used by the
reference experiments (all twenty angular values, equal powers); helpers
build ready-to-use channel statistics from it.
"""

from __future__ import annotations

import json
from importlib import resources

from .channel_model import ChannelStats, PathCluster, build_stats

__all__ = ["five_cluster_clusters", "five_cluster_stats"]


def five_cluster_clusters() -> list[PathCluster]:
    """The bundled five-path cluster list (angles in radians)."""
    raw = resources.files("mimo_capacity.data").joinpath("table1_clusters.json")
    payload = json.loads(raw.read_text(encoding="utf-8"))
    return [PathCluster(**c) for c in payload["clusters"]]


def five_cluster_stats(r: int = 4, t: int = 4, sigma2: float = 0.1) -> ChannelStats:
    """Channel statistics for the bundled five-cluster scenario."""
    return build_stats(five_cluster_clusters(), r=r, t=t, sigma2=sigma2)
