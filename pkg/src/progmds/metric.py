"""Distances over the active dimension window and embedding-quality metrics.

Two stress quantities live here and must not be confused:

* the raw per-iteration sample, a sum over points of ||D_i - d_i|| taken over
  each point's sparse neighbor set; it is cheap, noisy, and feeds only the
  convergence filter;
* the full normalized stress sqrt(sum (D_ij - d_ij)^2 / sum D_ij^2) over all
  point pairs, the expensive evaluation metric reported per progression step.

The normalized form is the standard Kruskal-style definition; swap
:func:`full_normalized_stress` if a different normalization is ever needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "high_distance",
    "low_distance",
    "neighbor_high_distances",
    "neighbor_low_distances",
    "sparse_stress_term",
    "full_normalized_stress",
    "shepard_sample",
    "ShepardSample",
]


def _active(data) -> np.ndarray:
    """Accept either a DataMatrix or a plain (n, dims) array."""
    if hasattr(data, "active_array"):
        return data.active_array()
    return np.asarray(data, dtype=np.float64)


def high_distance(matrix, i: int, j: int) -> float:
    """Euclidean distance between points i and j over all active dimensions,
    accumulated chunk by chunk."""
    acc = 0.0
    for chunk in matrix.active_chunks():
        diff = chunk.values[i] - chunk.values[j]
        acc += float(diff @ diff)
    return math.sqrt(acc)


def low_distance(positions, i: int, j: int) -> float:
    """Euclidean distance between embedded points i and j."""
    pos = getattr(positions, "positions", positions)
    diff = pos[i] - pos[j]
    return math.sqrt(float(diff @ diff))


def neighbor_high_distances(X, nbr_idx: np.ndarray, block: int = 2048) -> np.ndarray:
    """Distances from each point to its listed neighbors.

    X is the (n, dims) active-window array; nbr_idx is (n, k) integer indices.
    Processed in row blocks to bound the (block, k, dims) gather temporaries.
    """
    X = _active(X)
    n, k = nbr_idx.shape
    out = np.empty((n, k))
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = X[nbr_idx[start:stop]] - X[start:stop, None, :]
        np.sqrt(np.einsum("ijk,ijk->ij", diff, diff), out=out[start:stop])
    return out


def neighbor_low_distances(Y: np.ndarray, nbr_idx: np.ndarray) -> np.ndarray:
    """2-D counterpart of :func:`neighbor_high_distances`."""
    diff = Y[nbr_idx] - Y[:, None, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def sparse_stress_term(D_i, d_i) -> float:
    """Euclidean norm of D_i - d_i for one point's neighbor buffers.

    Summed over all points by the caller to form the iteration's raw stress
    sample.
    """
    D_i = np.asarray(D_i, dtype=np.float64)
    d_i = np.asarray(d_i, dtype=np.float64)
    if D_i.shape != d_i.shape:
        raise ValueError(f"buffer length mismatch: {D_i.shape} vs {d_i.shape}")
    return float(np.linalg.norm(D_i - d_i))


def full_normalized_stress(data, embedding, block: int = 1024) -> float:
    """sqrt( sum_{i<j} (D_ij - d_ij)^2 / sum_{i<j} D_ij^2 ) over ALL pairs,
    with D taken over the active dimension window.

    O(n^2 * dims); call per progression step or on demand, never per
    iteration. Raises on degenerate data (all points identical).
    """
    X = _active(data)
    Y = np.asarray(getattr(embedding, "positions", embedding), dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points")

    x_sq = np.einsum("ij,ij->i", X, X)
    y_sq = np.einsum("ij,ij->i", Y, Y)
    num = 0.0
    den = 0.0
    for start in range(0, n, block):
        stop = min(start + block, n)
        d_hi_sq = x_sq[start:stop, None] + x_sq[None, :] - 2.0 * (X[start:stop] @ X.T)
        d_lo_sq = y_sq[start:stop, None] + y_sq[None, :] - 2.0 * (Y[start:stop] @ Y.T)
        np.maximum(d_hi_sq, 0.0, out=d_hi_sq)
        np.maximum(d_lo_sq, 0.0, out=d_lo_sq)
        # keep strictly-upper-triangle pairs (j > global row index)
        cols = np.arange(n)[None, :]
        mask = cols > np.arange(start, stop)[:, None]
        D = np.sqrt(d_hi_sq[mask])
        d = np.sqrt(d_lo_sq[mask])
        num += float(((D - d) ** 2).sum())
        den += float((D**2).sum())
    if den == 0.0:
        raise ValueError("degenerate data: all high-dimensional distances are zero")
    return math.sqrt(num / den)


@dataclass(frozen=True)
class ShepardSample:
    """Sampled (high, low) distance pairs for a Shepard diagram."""

    high: np.ndarray
    low: np.ndarray
    seed: int

    @property
    def pair_count(self) -> int:
        return len(self.high)


def _pairs_from_flat(flat: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode flat upper-triangle indices (row-major, i<j) into (i, j)."""
    counts = n - 1 - np.arange(n - 1)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    i = np.searchsorted(offsets, flat, side="right") - 1
    j = flat - offsets[i] + i + 1
    return i, j


def shepard_sample(matrix, embedding, pair_count: int, seed: int) -> ShepardSample:
    """Uniformly sample distinct unordered point pairs without replacement and
    return their high/low distances. Returns all pairs when pair_count covers
    them. Deterministic under seed."""
    X = _active(matrix)
    Y = np.asarray(getattr(embedding, "positions", embedding), dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points")
    if pair_count < 1:
        raise ValueError("pair_count must be >= 1")

    total = n * (n - 1) // 2
    if pair_count >= total:
        flat = np.arange(total)
    elif total <= 4_000_000:
        flat = np.random.default_rng(seed).choice(total, size=pair_count, replace=False)
    else:
        rng = np.random.default_rng(seed)
        chosen: set[int] = set()
        while len(chosen) < pair_count:
            draw = rng.integers(0, total, size=pair_count - len(chosen))
            chosen.update(int(v) for v in draw)
        flat = np.fromiter(sorted(chosen), dtype=np.int64)

    i, j = _pairs_from_flat(np.sort(flat), n)
    high = np.sqrt(np.einsum("ij,ij->i", X[i] - X[j], X[i] - X[j]))
    low = np.sqrt(np.einsum("ij,ij->i", Y[i] - Y[j], Y[i] - Y[j]))
    return ShepardSample(high=high, low=low, seed=seed)
