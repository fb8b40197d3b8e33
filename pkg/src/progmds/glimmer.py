"""Batch multilevel Glimmer: the non-progressive baseline.

The layout is solved on nested point subsets from small to full: a random
permutation of the points defines the hierarchy (each level is a prefix), so
a level extends the previous one in place. The smallest level starts from
random positions in the unit square; every following level places its new
points next to their closest already-placed reference and relaxes with the
full-length stress filter until converged or capped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._streams import substream
from .convergence import ConvergenceConfig, ConvergenceState, StressTrace, check_converged, smoothed_stress
from .layout import (
    Embedding,
    LayoutConfig,
    NeighborSets,
    effective_neighbor_count,
    init_neighbors,
    layout_step,
    update_neighbors,
)

__all__ = [
    "GlimmerConfig",
    "LevelHierarchy",
    "GlimmerResult",
    "build_hierarchy",
    "interpolate_new_points",
    "run_glimmer",
]

_STREAM_HIERARCHY = 11
_STREAM_INIT = 12
_STREAM_NEIGHBORS = 13
_STREAM_UPDATE = 14
_STREAM_INTERP = 15
_STREAM_JITTER = 16


def _batch_convergence() -> ConvergenceConfig:
    # batch mode always smooths with the full-length filter
    return ConvergenceConfig(base_filter_length=50, max_filter_length=50)


@dataclass
class GlimmerConfig:
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    convergence: ConvergenceConfig = field(default_factory=_batch_convergence)
    decimation_factor: int = 4
    min_level_size: int = 128
    max_iterations_per_level: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.decimation_factor < 2:
            raise ValueError("decimation_factor must be >= 2")
        if self.min_level_size < 2:
            raise ValueError("min_level_size must be >= 2")
        if self.max_iterations_per_level < 1:
            raise ValueError("max_iterations_per_level must be >= 1")


@dataclass(frozen=True)
class LevelHierarchy:
    """Nested point subsets as prefixes of one permutation.

    level ``i`` consists of ``order[:sizes[i]]``; sizes are ascending and the
    last level covers all points, so every lower level is a strict subset of
    the next.
    """

    order: np.ndarray  # permutation of range(n)
    sizes: tuple[int, ...]

    @property
    def level_count(self) -> int:
        return len(self.sizes)

    def level_indices(self, level: int) -> np.ndarray:
        return self.order[: self.sizes[level]]

    @property
    def levels(self) -> list[np.ndarray]:
        return [self.level_indices(i) for i in range(self.level_count)]


def build_hierarchy(n: int, decimation_factor: int = 4, min_level_size: int = 128,
                    seed: int = 0) -> LevelHierarchy:
    """Level sizes shrink by ceil(size / decimation_factor) from all n points
    down to the first size <= min_level_size. Subsets are uniform because each
    level is a prefix of one seeded random permutation."""
    if n < 2:
        raise ValueError("need at least 2 points")
    sizes = [n]
    while sizes[-1] > min_level_size:
        sizes.append(math.ceil(sizes[-1] / decimation_factor))
    sizes.reverse()
    order = substream(seed, _STREAM_HIERARCHY).permutation(n)
    return LevelHierarchy(order=order, sizes=tuple(sizes))


def interpolate_new_points(X: np.ndarray, positions: np.ndarray, placed_count: int,
                           k: int, rng: np.random.Generator,
                           jitter_fraction: float = 0.01) -> None:
    """Place points [placed_count:] at their nearest already-placed reference.

    For each new point, k placed candidates are sampled, the closest by
    high-dimensional distance wins, and a small uniform jitter (scaled to
    jitter_fraction of the placed bounding-box diagonal) breaks exact
    stacking. Mutates `positions` in place.
    """
    total = X.shape[0]
    new_count = total - placed_count
    if new_count <= 0:
        return
    if placed_count <= k:
        refs = np.tile(np.arange(placed_count), (new_count, 1))
    else:
        refs = rng.integers(0, placed_count, size=(new_count, k))
    diff = X[refs] - X[placed_count:, None, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    best = refs[np.arange(new_count), np.argmin(dist, axis=1)]

    span = positions[:placed_count].max(axis=0) - positions[:placed_count].min(axis=0)
    scale = jitter_fraction * float(np.hypot(span[0], span[1]))
    if scale == 0.0:
        scale = 1e-6
    positions[placed_count:] = positions[best] + rng.uniform(-scale, scale, size=(new_count, 2))


def _extend_neighbors(neighbors: NeighborSets, new_total: int, k: int,
                      rng: np.random.Generator) -> NeighborSets:
    """Grow neighbor sets to cover newly placed points; existing rows carry
    over unchanged (their indices stay valid in the prefix ordering)."""
    old_total = neighbors.point_count
    fresh = init_neighbors(new_total, k, rng)
    fresh.near[:old_total] = neighbors.near
    fresh.near_dist[:old_total] = neighbors.near_dist
    fresh.random[:old_total] = neighbors.random
    fresh.diagnostics = neighbors.diagnostics
    return fresh


@dataclass
class GlimmerResult:
    embedding: Embedding
    trace: StressTrace
    neighbors: NeighborSets  # in original point order, for warm starts
    hierarchy: LevelHierarchy
    iterations_per_level: list[int]

    @property
    def total_iterations(self) -> int:
        return sum(self.iterations_per_level)


def run_glimmer(matrix, config: GlimmerConfig | None = None) -> GlimmerResult:
    """Multilevel relaxation of the active window of `matrix`.

    The requested neighbor count is clamped per level when a level is too
    small to support it. The returned embedding, trace, and neighbor sets are
    in original point order.
    """
    config = config or GlimmerConfig()
    X_full = matrix.active_array() if hasattr(matrix, "active_array") else np.asarray(matrix)
    n = X_full.shape[0]

    hierarchy = build_hierarchy(
        n, config.decimation_factor, config.min_level_size, seed=config.seed
    )
    Xw = X_full[hierarchy.order]
    Yw = np.zeros((n, 2))
    Fw = np.zeros((n, 2))

    size0 = hierarchy.sizes[0]
    Yw[:size0] = substream(config.seed, _STREAM_INIT).random((size0, 2))

    k = effective_neighbor_count(config.layout.neighbor_count, size0)
    neighbors = init_neighbors(size0, k, substream(config.seed, _STREAM_NEIGHBORS))

    trace = StressTrace()
    iterations_per_level: list[int] = []
    jitter_rng = substream(config.seed, _STREAM_JITTER)

    for level, size in enumerate(hierarchy.sizes):
        if level > 0:
            interpolate_new_points(
                Xw[:size], Yw[:size], placed_count=hierarchy.sizes[level - 1],
                k=k, rng=substream(config.seed, _STREAM_INTERP, level),
            )
            k_next = effective_neighbor_count(config.layout.neighbor_count, size)
            if k_next != k:  # only possible right after a tiny bottom level
                k = k_next
                neighbors = init_neighbors(size, k, substream(config.seed, _STREAM_NEIGHBORS, level))
            else:
                neighbors = _extend_neighbors(
                    neighbors, size, k, substream(config.seed, _STREAM_NEIGHBORS, level)
                )
            Fw[:size] = 0.0

        # prefix slices are contiguous, so the Embedding wraps live views
        view = Embedding(Yw[:size], Fw[:size])

        state = ConvergenceState(filter_length=config.convergence.base_filter_length)
        raw: list[float] = []
        used = 0
        for iteration in range(1, config.max_iterations_per_level + 1):
            sample = layout_step(Xw[:size], view, neighbors, config.layout, rng=jitter_rng)
            raw.append(sample)
            trace.append(
                level, iteration, sample,
                smoothed_stress(raw, state.filter_length, config.convergence.cutoff),
                state.filter_length,
            )
            used = iteration
            if check_converged(raw, config.convergence, state):
                break
            update_neighbors(
                Xw[:size], neighbors, substream(config.seed, _STREAM_UPDATE, level, iteration)
            )
        iterations_per_level.append(used)

    # map everything back to original point order
    inverse = np.empty(n, dtype=np.int64)
    inverse[hierarchy.order] = np.arange(n)
    positions = Yw[inverse]
    forces = Fw[inverse]
    near = hierarchy.order[neighbors.near][inverse]
    random = hierarchy.order[neighbors.random][inverse]
    out_neighbors = NeighborSets(
        near=near,
        near_dist=neighbors.near_dist[inverse].copy(),
        random=random,
        diagnostics=neighbors.diagnostics,
    )
    return GlimmerResult(
        embedding=Embedding(positions, forces),
        trace=trace,
        neighbors=out_neighbors,
        hierarchy=hierarchy,
        iterations_per_level=iterations_per_level,
    )
