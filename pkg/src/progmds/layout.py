"""One force-relaxation iteration and stochastic neighbor-set maintenance.

Every point keeps a fixed-size candidate set of k other points, split into a
retained near half (kept sorted by cached high-dimensional distance) and a
random half that is resampled every iteration. Forces follow the spring form
of the sparse stress gradient: each neighbor pulls or pushes its point by
(d - D)/d along the embedded offset, where D and d are the high- and
low-dimensional distances. Repeated keep-closest-half resampling drives the
near halves toward the true nearest neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metric import neighbor_high_distances, neighbor_low_distances

__all__ = [
    "LayoutConfig",
    "Embedding",
    "NeighborSets",
    "init_neighbors",
    "layout_step",
    "update_neighbors",
    "effective_neighbor_count",
]


@dataclass
class LayoutConfig:
    """Force-iteration tunables.

    neighbor_count (k) must be even: half of each set is retained, half
    resampled. step_size and damping were calibrated on the acceptance
    scenarios (plane recovery, progressive-vs-batch parity) and are recorded
    in every run manifest.
    """

    neighbor_count: int = 8
    step_size: float = 0.1
    damping: float = 0.3
    min_distance_epsilon: float = 1e-9

    def __post_init__(self):
        if self.neighbor_count < 2 or self.neighbor_count % 2 != 0:
            raise ValueError("neighbor_count must be an even integer >= 2")
        if self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must be in [0, 1)")
        if self.min_distance_epsilon <= 0:
            raise ValueError("min_distance_epsilon must be > 0")


def effective_neighbor_count(k: int, n: int) -> int:
    """Largest even neighbor count <= k usable with n points (needs n > k)."""
    k_eff = min(k, n - 1)
    k_eff -= k_eff % 2
    if k_eff < 2:
        raise ValueError(f"too few points ({n}) for any neighbor set")
    return k_eff


class Embedding:
    """Positions and accumulated displacement state of the 2-D layout."""

    def __init__(self, positions: np.ndarray, forces: np.ndarray | None = None):
        self.positions = np.ascontiguousarray(positions, dtype=np.float64)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must be (n, 2)")
        if forces is None:
            forces = np.zeros_like(self.positions)
        self.forces = np.ascontiguousarray(forces, dtype=np.float64)
        if self.forces.shape != self.positions.shape:
            raise ValueError("forces must match positions shape")

    @classmethod
    def random_unit_square(cls, n: int, rng: np.random.Generator) -> "Embedding":
        return cls(rng.random((n, 2)))

    @property
    def point_count(self) -> int:
        return self.positions.shape[0]

    def reset_forces(self):
        self.forces[:] = 0.0

    def copy(self) -> "Embedding":
        return Embedding(self.positions.copy(), self.forces.copy())


@dataclass
class NeighborSets:
    """Per-point candidate sets: a near half with cached high distances and a
    freshly randomized half.

    near rows are sorted ascending by cached distance (ties by index); the
    combined per-point set never contains self or duplicates. last_dists
    caches the distances the previous layout_step computed for members();
    it is invalidated by resampling and marked stale by window changes.
    """

    near: np.ndarray  # (n, k/2) int64
    near_dist: np.ndarray  # (n, k/2) float64, +inf while unknown
    random: np.ndarray  # (n, k/2) int64
    last_dists: np.ndarray | None = None  # (n, k) aligned with members()
    stale: bool = True
    diagnostics: dict = field(default_factory=lambda: {"nonfinite_forces": 0, "coincident_repairs": 0})

    @property
    def k(self) -> int:
        return self.near.shape[1] + self.random.shape[1]

    @property
    def point_count(self) -> int:
        return self.near.shape[0]

    def members(self) -> np.ndarray:
        """Current (n, k) candidate indices, near half first."""
        return np.concatenate([self.near, self.random], axis=1)

    def mark_stale(self):
        """Call after the active dimension window changes: cached distances no
        longer reflect the current window."""
        self.stale = True
        self.last_dists = None


def _sample_distinct(
    rng: np.random.Generator, n: int, count: int, exclude: np.ndarray | None, rows: np.ndarray
) -> np.ndarray:
    """Per row r: `count` distinct indices in [0, n), none equal to rows[r],
    none in exclude[r]. Rejection-resamples collisions; falls back to exact
    per-row sampling when the feasible pool is tight."""
    m = len(rows)
    if count == 0:
        return np.empty((m, 0), dtype=np.int64)
    exclude_width = 0 if exclude is None else exclude.shape[1]
    available = n - 1 - exclude_width
    if available < count:
        raise ValueError(f"cannot sample {count} distinct indices from a pool of {available}")

    if available < 2 * count:
        # tiny feasible pool: enumerate it exactly, row by row
        out = np.empty((m, count), dtype=np.int64)
        for r in range(m):
            banned = {int(rows[r])}
            if exclude is not None:
                banned.update(int(v) for v in exclude[r])
            pool = np.array([v for v in range(n) if v not in banned], dtype=np.int64)
            out[r] = rng.permutation(pool)[:count]
        return out

    out = rng.integers(0, n, size=(m, count), dtype=np.int64)
    for _ in range(10_000):
        bad = out == rows[:, None]
        if exclude is not None:
            bad |= (out[:, :, None] == exclude[:, None, :]).any(axis=2)
        dup = out[:, :, None] == out[:, None, :]
        earlier = np.tril(np.ones((count, count), dtype=bool), k=-1)
        bad |= (dup & earlier[None, :, :]).any(axis=2)
        n_bad = int(bad.sum())
        if n_bad == 0:
            return out
        out[bad] = rng.integers(0, n, size=n_bad, dtype=np.int64)
    raise RuntimeError("neighbor sampling failed to converge")


def init_neighbors(n: int, k: int, rng) -> NeighborSets:
    """k distinct uniformly sampled non-self candidates per point, split
    arbitrarily into near/random halves pending the first distance pass."""
    if k < 2 or k % 2 != 0:
        raise ValueError("k must be an even integer >= 2")
    if n <= k:
        raise ValueError(f"too few points for neighbor count: need n > k, got n={n}, k={k}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    half = k // 2
    members = _sample_distinct(rng, n, k, exclude=None, rows=np.arange(n))
    return NeighborSets(
        near=members[:, :half].copy(),
        near_dist=np.full((n, half), np.inf),
        random=members[:, half:].copy(),
    )


def layout_step(data, embedding: Embedding, neighbors: NeighborSets, config: LayoutConfig,
                rng: np.random.Generator | None = None) -> float:
    """One relaxation iteration; returns the raw sparse-stress sample.

    All distances are computed against the pre-step position snapshot, then
    forces are damped, incremented by step_size times the spring sum, and
    applied to every point at once. Distances for the current candidate sets
    are cached on `neighbors` for the following resampling pass.

    Points that coincide in the embedding while being distinct in data space
    get a deterministic tiny jitter (from `rng`) so a spring direction exists;
    non-finite forces are zeroed instead of propagating. Both repairs count
    into neighbors.diagnostics.
    """
    X = data.active_array() if hasattr(data, "active_array") else np.asarray(data)
    Y = embedding.positions
    F = embedding.forces
    eps = config.min_distance_epsilon

    nbr = neighbors.members()
    D = neighbor_high_distances(X, nbr)
    d = neighbor_low_distances(Y, nbr)

    coincident = (d <= eps) & (D > eps)
    if coincident.any() and rng is not None:
        rows = np.unique(np.nonzero(coincident)[0])
        span = Y.max(axis=0) - Y.min(axis=0)
        scale = max(float(np.hypot(span[0], span[1])) * 1e-6, 1e-9)
        Y[rows] += rng.normal(0.0, scale, size=(len(rows), 2))
        d[rows] = neighbor_low_distances(Y, nbr[rows])  # refresh jittered rows
        neighbors.diagnostics["coincident_repairs"] += len(rows)

    residual = D - d
    raw = float(np.sqrt(np.einsum("ij,ij->i", residual, residual)).sum())

    coef = residual / np.maximum(d, eps)
    spring = np.einsum("ij,ijk->ik", coef, Y[:, None, :] - Y[nbr])
    F *= config.damping
    F += config.step_size * spring

    bad = ~np.isfinite(F).all(axis=1)
    if bad.any():
        F[bad] = 0.0
        neighbors.diagnostics["nonfinite_forces"] += int(bad.sum())

    Y += F
    bad_pos = ~np.isfinite(Y).all(axis=1)
    if bad_pos.any():  # overflow guard: undo the update for the affected rows
        Y[bad_pos] -= F[bad_pos]
        F[bad_pos] = 0.0
        neighbors.diagnostics["nonfinite_forces"] += int(bad_pos.sum())
    neighbors.last_dists = D
    neighbors.stale = False
    return raw


def update_neighbors(data, neighbors: NeighborSets, rng) -> NeighborSets:
    """Swap scheme: pool the current candidates with k/2 fresh uniform ones,
    keep the k/2 closest (by current-window high distance, ties by index) as
    the new near half, then resample the random half fresh, excluding the
    near half and self.

    Requires the distances cached by the preceding layout_step; mutates and
    returns `neighbors`.
    """
    if neighbors.last_dists is None or neighbors.stale:
        raise RuntimeError("update_neighbors needs distances cached by a preceding layout_step")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    X = data.active_array() if hasattr(data, "active_array") else np.asarray(data)
    n = X.shape[0]
    m = neighbors.point_count
    k = neighbors.k
    half = k // 2
    rows = np.arange(m)

    members = neighbors.members()
    fresh_count = min(half, n - 1 - k)
    if fresh_count > 0:
        fresh = _sample_distinct(rng, n, fresh_count, exclude=members, rows=rows)
        pool_idx = np.concatenate([members, fresh], axis=1)
        pool_dist = np.concatenate(
            [neighbors.last_dists, neighbor_high_distances(X, fresh)], axis=1
        )
    else:
        pool_idx = members
        pool_dist = neighbors.last_dists

    # lexicographic (distance, index) order: stable sort by index, then by distance
    by_idx = np.argsort(pool_idx, axis=1, kind="stable")
    dist_tmp = np.take_along_axis(pool_dist, by_idx, axis=1)
    by_dist = np.argsort(dist_tmp, axis=1, kind="stable")
    order = np.take_along_axis(by_idx, by_dist, axis=1)[:, :half]

    neighbors.near = np.take_along_axis(pool_idx, order, axis=1)
    neighbors.near_dist = np.take_along_axis(pool_dist, order, axis=1)
    neighbors.random = _sample_distinct(rng, n, half, exclude=neighbors.near, rows=rows)
    neighbors.last_dists = None  # membership changed; next layout_step recomputes
    return neighbors
