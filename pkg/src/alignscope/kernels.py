"""Similarity kernels and the pooling primitive.

All downstream analyses are built from these three pure functions, so they
accept anything ``np.asarray`` understands and always compute in float64.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EmptyMatrix, ZeroVector


def cosine(x, y) -> float:
    """Cosine similarity x.y / (|x||y|), clamped to [-1, 1].

    Raises ZeroVector if either argument has zero norm; a silent default
    would corrupt every rank statistic downstream.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatch(f"cosine: shapes {x.shape} vs {y.shape}")
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise ZeroVector("cosine undefined for zero-norm vector")
    if np.array_equal(x, y):
        return 1.0  # self-similarity is 1 by definition, not 1 - 1ulp
    # rounding can push |value| past 1 by ~1e-16; clamp to keep it legal
    return float(min(1.0, max(-1.0, float(x @ y) / (nx * ny))))


def euclidean(x, y) -> float:
    """L2 distance |x - y|."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatch(f"euclidean: shapes {x.shape} vs {y.shape}")
    return float(np.linalg.norm(x - y))


def mean_pool(matrix) -> np.ndarray:
    """Component-wise mean over rows of a T x d matrix."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch(f"mean_pool expects a 2-d matrix, got ndim={m.ndim}")
    if m.shape[0] == 0:
        raise EmptyMatrix("mean_pool over zero rows")
    return m.mean(axis=0)


METRICS = ("cos", "dist")


def metric_fn(metric: str):
    """Resolve a metric name to its kernel; raises on unknown names."""
    if metric == "cos":
        return cosine
    if metric == "dist":
        return euclidean
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
