"""Exact k-nearest-neighbor metric indexes that support interleaved inserts and queries."""

from .covertree import CoverTree
from .exceptions import (AuditError, ConfigError, CorrectnessError, InvalidInputError,
                         LoadError, MetricIndexError)
from .metrics import (CountingMetric, Item, Metric, counted, euclidean, get_metric,
                      jaccard_distance, levenshtein, lz_set, lzjd, read_count, reset_count)
from .oracle import BruteForceIndex, Neighbor, brute_knn, brute_radius
from .rbc import RbcIndex
from .vptree import VpTree, min_variance_split

__version__ = "0.1.0"

__all__ = [
    "AuditError", "BruteForceIndex", "ConfigError", "CorrectnessError", "CountingMetric",
    "CoverTree", "InvalidInputError", "Item", "LoadError", "Metric", "MetricIndexError",
    "Neighbor", "RbcIndex", "VpTree", "brute_knn", "brute_radius", "counted", "euclidean",
    "get_metric", "jaccard_distance", "levenshtein", "lz_set", "lzjd", "min_variance_split",
    "read_count", "reset_count",
]
