"""Progressive refinement engine: grow the active dimension window chunk by
chunk, re-relaxing the whole embedding from the previous step's state.

Each progression step activates the next chunk (or slides the window), keeps
the positions and neighbor sets of the previous step as the starting point,
resets the accumulated forces and the convergence filter, and iterates the
force layout on all points until the smoothed stress settles or the
iteration cap z is hit. No multilevel hierarchy is involved after the first
step; the warm start replaces it.
"""

from __future__ import annotations

import queue
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._streams import substream
from .convergence import ConvergenceConfig, ConvergenceState, StressTrace, check_converged, smoothed_stress
from .glimmer import GlimmerConfig, run_glimmer
from .layout import (
    Embedding,
    LayoutConfig,
    effective_neighbor_count,
    init_neighbors,
    layout_step,
    update_neighbors,
)
from .metric import full_normalized_stress

__all__ = [
    "ProgressiveConfig",
    "ProgressSnapshot",
    "ProgressiveEngine",
    "SnapshotBuffer",
    "run_progressive",
    "run_sliding",
]

INIT_MODES = ("first2", "glimmer")
ORDERS = ("given", "random")
MODES = ("append", "sliding")
FULL_STRESS_POLICIES = ("per-chunk", "final", "never")

_STREAM_ORDER = 21
_STREAM_NEIGHBORS = 22
_STREAM_UPDATE = 23
_STREAM_JITTER = 24


@dataclass
class ProgressiveConfig:
    """Everything a progressive run needs; all fields land in the manifest."""

    layout: LayoutConfig = field(default_factory=LayoutConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    max_iterations: int | None = 100  # z; None runs each step to convergence
    emit_every: int | None = None  # intra-step observer emissions; None: per chunk only
    init_mode: str = "first2"
    order: str = "given"
    order_seed: int | None = None
    mode: str = "append"
    evict_count: int = 1  # sliding: chunks dropped per step after warm-up
    window_dims: int | None = None  # sliding: slide once this many dims are active
    full_stress: str = "per-chunk"
    carry_forces: bool = False  # keep accumulated displacement across steps
    seed: int = 0
    glimmer: GlimmerConfig | None = None  # init_mode="glimmer"; derived when None

    def __post_init__(self):
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1 (or None for unlimited)")
        if self.emit_every is not None and self.emit_every < 1:
            raise ValueError("emit_every must be >= 1")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}")
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.evict_count < 0:
            raise ValueError("evict_count must be >= 0")
        if self.full_stress not in FULL_STRESS_POLICIES:
            raise ValueError(f"full_stress must be one of {FULL_STRESS_POLICIES}")

    def glimmer_config(self) -> GlimmerConfig:
        if self.glimmer is not None:
            return self.glimmer
        return GlimmerConfig(layout=self.layout, seed=self.seed)


@dataclass(frozen=True)
class ProgressSnapshot:
    """Immutable view of the engine after a progression step (or, with
    iteration set, mid-step). Positions are a read-only copy."""

    step: int
    active_dims: int
    iterations_used: int
    positions: np.ndarray
    raw_stress: float | None
    smoothed_stress: float | None
    full_stress: float | None
    duration_s: float
    iteration: int | None = None  # set on intra-step emissions only
    is_final: bool = True


class SnapshotBuffer:
    """Bounded thread-safe observer: the engine blocks when the buffer is
    full rather than dropping snapshots, so a slow consumer throttles the
    computation instead of losing intermediate results."""

    def __init__(self, maxsize: int = 16):
        self._queue: queue.Queue = queue.Queue(maxsize)

    def __call__(self, snapshot: ProgressSnapshot):
        self._queue.put(snapshot)

    def get(self, timeout: float | None = None) -> ProgressSnapshot:
        return self._queue.get(timeout=timeout)

    def drain(self) -> list[ProgressSnapshot]:
        out = []
        while True:
            try:
                out.append(self._queue.get_nowait())
            except queue.Empty:
                return out


def _unit_box_rescale(column: np.ndarray, axis_name: str) -> np.ndarray:
    span = float(column.max() - column.min())
    if span == 0.0:
        warnings.warn(
            f"initial {axis_name} dimension is constant; the axis collapses to 0",
            RuntimeWarning,
            stacklevel=3,
        )
        return np.zeros_like(column)
    return (column - column.min()) / span


class ProgressiveEngine:
    """Drives one progressive run over a DataMatrix whose chunks are pending.

    Construction activates the initial window and builds the starting
    embedding; :meth:`step` then advances one chunk at a time. The split
    :meth:`advance` / :meth:`refine` pair is public so callers (and tests)
    can observe the warm-started state between window change and relaxation.
    """

    def __init__(self, matrix, config: ProgressiveConfig, observer=None):
        self.matrix = matrix
        self.config = config
        self.observer = observer
        self.trace = StressTrace()
        self.snapshots: list[ProgressSnapshot] = []
        self._step_index = 0
        self._observer_time = 0.0
        self._initialized = False

        t0 = time.perf_counter()
        pending = list(matrix.inactive_ids)
        if not pending and matrix.active_dims == 0:
            raise ValueError("matrix has no chunks")
        if config.order == "random":
            order_seed = config.order_seed if config.order_seed is not None else config.seed
            pending = [pending[i] for i in substream(order_seed, _STREAM_ORDER).permutation(len(pending))]
        self._pending = pending

        init_iterations = 0
        if matrix.active_dims == 0:
            if config.init_mode == "first2":
                while matrix.active_dims < 2:
                    if not self._pending:
                        raise ValueError("init mode first2 needs at least 2 dimensions")
                    matrix.activate(self._pending.pop(0))
            else:
                matrix.activate(self._pending.pop(0))

        n = matrix.point_count
        self._k = effective_neighbor_count(config.layout.neighbor_count, n)
        self._needs_initial_relax = False
        init_raw: float | None = None
        init_smoothed: float | None = None

        if config.init_mode == "first2":
            if matrix.active_dims < 2:
                raise ValueError("init mode first2 needs at least 2 active dimensions")
            X = matrix.active_array()
            positions = np.column_stack(
                [_unit_box_rescale(X[:, 0], "x"), _unit_box_rescale(X[:, 1], "y")]
            )
            self.embedding = Embedding(positions)
            self.neighbors = init_neighbors(n, self._k, substream(config.seed, _STREAM_NEIGHBORS))
            self._needs_initial_relax = True
        else:
            result = run_glimmer(matrix, config.glimmer_config())
            self.embedding = result.embedding
            self.neighbors = result.neighbors
            init_iterations = result.total_iterations
            for i, (_, _, raw, sm, fl) in enumerate(result.trace.rows(), start=1):
                self.trace.append(0, i, raw, None if np.isnan(sm) else sm, fl)
            if result.trace.raw:
                init_raw = result.trace.raw[-1]
                sm = result.trace.smoothed[-1]
                init_smoothed = None if np.isnan(sm) else sm

        self._init_dims = matrix.active_dims
        self._init_info = (init_iterations, init_raw, init_smoothed, time.perf_counter() - t0)

    # -- state ------------------------------------------------------------

    @property
    def positions(self) -> np.ndarray:
        return self.embedding.positions

    @property
    def step_index(self) -> int:
        return self._step_index

    @property
    def pending_chunks(self) -> tuple[int, ...]:
        return tuple(self._pending)

    @property
    def is_done(self) -> bool:
        return self._initialized and not self._pending and not self._needs_initial_relax

    # -- lifecycle ----------------------------------------------------------

    def initialize(self) -> ProgressSnapshot:
        """Emit the step-0 snapshot for the initial window."""
        if self._initialized:
            raise RuntimeError("already initialized")
        self._initialized = True
        iterations, raw, smoothed, duration = self._init_info
        snap = self._make_snapshot(iterations, raw, smoothed, duration)
        self._emit(snap)
        self.snapshots.append(snap)
        return snap

    def advance(self, chunk=None, label: str | None = None) -> int:
        """Bring one more chunk into the active window (evicting in sliding
        mode) while keeping positions and neighbor sets; resets forces and
        marks cached neighbor distances stale. Returns the activated chunk id.

        Without arguments the next pending chunk is consumed; passing `chunk`
        (a point_count x width array) registers newly arrived data instead,
        the streaming form.
        """
        if chunk is not None:
            chunk_id = self.matrix.register(chunk, label=label)
        elif self._pending:
            chunk_id = self._pending.pop(0)
        else:
            raise RuntimeError("no pending chunks")
        if self.config.mode == "sliding":
            target = self.config.window_dims if self.config.window_dims is not None else self._init_dims
            if self.matrix.active_dims >= target:
                self.matrix.slide_to(chunk_id, self.config.evict_count)
            else:
                self.matrix.activate(chunk_id)
        else:
            self.matrix.activate(chunk_id)
        self._needs_initial_relax = False
        self.neighbors.mark_stale()
        if not self.config.carry_forces:
            self.embedding.reset_forces()
        return chunk_id

    _USE_CONFIG = object()

    def refine(self, max_iterations=_USE_CONFIG) -> tuple[int, float | None, float | None]:
        """Relax the current window until converged or capped; returns
        (iterations used, last raw sample, last smoothed value).

        max_iterations overrides the configured cap for this call only
        (None means run to convergence).
        """
        config = self.config
        cap = config.max_iterations if max_iterations is self._USE_CONFIG else max_iterations
        state = ConvergenceState(filter_length=config.convergence.base_filter_length)
        step = self._step_index
        jitter_rng = substream(config.seed, _STREAM_JITTER, step)
        raw_values: list[float] = []
        last_smoothed: float | None = None
        iteration = 0

        while cap is None or iteration < cap:
            iteration += 1
            sample = layout_step(self.matrix, self.embedding, self.neighbors, config.layout,
                                 rng=jitter_rng)
            raw_values.append(sample)
            last_smoothed = smoothed_stress(raw_values, state.filter_length, config.convergence.cutoff)
            self.trace.append(step, iteration, sample, last_smoothed, state.filter_length)
            if config.emit_every is not None and iteration % config.emit_every == 0:
                self._emit(self._make_snapshot(iteration, sample, last_smoothed, 0.0,
                                               iteration=iteration, is_final=False))
            if check_converged(raw_values, config.convergence, state):
                break
            update_neighbors(self.matrix, self.neighbors,
                             substream(config.seed, _STREAM_UPDATE, step, iteration))
        last_raw = raw_values[-1] if raw_values else None
        return iteration, last_raw, last_smoothed

    def step(self, chunk=None, label: str | None = None) -> ProgressSnapshot:
        """One progression step: advance the window (unless the initial
        window still awaits its first relaxation) and refine. `chunk`
        feeds newly arrived data, as in :meth:`advance`."""
        if not self._initialized:
            raise RuntimeError("call initialize() first")
        if self.is_done and chunk is None:
            raise RuntimeError("run complete")
        self._observer_time = 0.0
        t0 = time.perf_counter()
        if chunk is not None:
            self.advance(chunk, label=label)
        elif self._needs_initial_relax:
            self._needs_initial_relax = False
        else:
            self.advance()
        self._step_index += 1
        iterations, raw, smoothed = self.refine()
        duration = time.perf_counter() - t0 - self._observer_time
        snap = self._make_snapshot(iterations, raw, smoothed, duration)
        self._emit(snap)
        self.snapshots.append(snap)
        return snap

    def run(self) -> list[ProgressSnapshot]:
        self.initialize()
        while not self.is_done:
            self.step()
        return self.snapshots

    # -- helpers -----------------------------------------------------------

    def _want_full_stress(self) -> bool:
        policy = self.config.full_stress
        if policy == "never":
            return False
        if policy == "per-chunk":
            return True
        return not self._pending and not self._needs_initial_relax  # "final"

    def _make_snapshot(self, iterations, raw, smoothed, duration, iteration=None,
                       is_final=True) -> ProgressSnapshot:
        positions = self.embedding.positions.copy()
        positions.setflags(write=False)
        full = None
        if is_final and self._want_full_stress():
            full = full_normalized_stress(self.matrix, positions)
        return ProgressSnapshot(
            step=self._step_index,
            active_dims=self.matrix.active_dims,
            iterations_used=int(iterations),
            positions=positions,
            raw_stress=raw,
            smoothed_stress=smoothed,
            full_stress=full,
            duration_s=float(duration),
            iteration=iteration,
            is_final=is_final,
        )

    def _emit(self, snapshot: ProgressSnapshot):
        if self.observer is None:
            return
        t0 = time.perf_counter()
        self.observer(snapshot)
        self._observer_time += time.perf_counter() - t0


def run_progressive(matrix, config: ProgressiveConfig, observer=None):
    """Run a full progression over all registered chunks.

    Returns (final Embedding, list of per-step ProgressSnapshots).
    """
    engine = ProgressiveEngine(matrix, config, observer=observer)
    snapshots = engine.run()
    return engine.embedding, snapshots


def run_sliding(matrix, config: ProgressiveConfig, observer=None):
    """Sliding-window variant of :func:`run_progressive` (mode must be
    "sliding"); new chunks evict the oldest active ones once the window is
    full, so the active dimension count stays constant after warm-up."""
    if config.mode != "sliding":
        raise ValueError('run_sliding requires config.mode == "sliding"')
    return run_progressive(matrix, config, observer=observer)
