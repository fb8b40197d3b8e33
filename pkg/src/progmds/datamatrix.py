"""Column-chunked data matrices, CSV loaders, and synthetic dataset generators.

High-dimensional input is stored as an ordered list of column chunks so that
dimensions can arrive incrementally: new chunks are appended (progressive
mode) or replace the oldest ones (sliding-window mode). Distances are always
taken over the currently active chunks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "ColumnChunk",
    "DataMatrix",
    "SyntheticSpec",
    "SYNTHETIC_KINDS",
    "load_csv",
    "load_chunk_dir",
    "generate",
    "generate_values",
]


class DataError(ValueError):
    """Malformed input data: ragged rows, non-numeric cells, shape mismatches."""


@dataclass(frozen=True)
class ColumnChunk:
    """One progression unit: a block of `width` contiguous dimensions.

    Values are validated once at construction (finite, 2-D, width >= 1) and
    frozen; distance code can trust them without re-checking.
    """

    chunk_id: int
    values: np.ndarray
    label: str | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError(f"chunk {self.chunk_id}: expected a 2-D array, got ndim={values.ndim}")
        if values.shape[1] < 1:
            raise DataError(f"chunk {self.chunk_id}: width must be >= 1")
        if not np.isfinite(values).all():
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataError(
                f"chunk {self.chunk_id}: non-finite value at row {bad[0] + 1}, column {bad[1] + 1}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def point_count(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


class DataMatrix:
    """n points by a growing set of dimensions, stored as column chunks.

    Chunks are registered in order. Only chunks in the active window
    contribute to distances; loaders register everything inactive and the
    engine activates chunks step by step. Streaming callers use
    :meth:`append_chunk` / :meth:`slide_window`, which register and activate
    in one call. Mutation happens only between relaxation passes
    (single-writer); reads of the active window are safe to share.
    """

    def __init__(self, point_count: int):
        if point_count < 1:
            raise DataError("point_count must be >= 1")
        self.point_count = int(point_count)
        self._chunks: list[ColumnChunk] = []
        self._active: list[int] = []
        self._active_cache: np.ndarray | None = None

    # -- registration / activation -------------------------------------

    def register(self, values, label: str | None = None) -> int:
        """Add an inactive chunk; returns its id."""
        chunk = ColumnChunk(chunk_id=len(self._chunks), values=np.asarray(values), label=label)
        if chunk.point_count != self.point_count:
            raise DataError(
                f"chunk {chunk.chunk_id} ({label or 'unlabeled'}): has {chunk.point_count} rows, "
                f"expected {self.point_count}"
            )
        self._chunks.append(chunk)
        return chunk.chunk_id

    def activate(self, chunk_id: int) -> int:
        """Append a registered chunk to the active window tail; returns active dims."""
        if chunk_id < 0 or chunk_id >= len(self._chunks):
            raise DataError(f"unknown chunk id {chunk_id}")
        if chunk_id in self._active:
            raise DataError(f"chunk {chunk_id} is already active")
        self._active.append(chunk_id)
        self._active_cache = None
        return self.active_dims

    def append_chunk(self, values, label: str | None = None) -> int:
        """Register a new chunk and activate it immediately; returns active dims."""
        return self.activate(self.register(values, label))

    def slide_window(self, values, evict_count: int, label: str | None = None) -> int:
        """Activate a new chunk and deactivate the `evict_count` oldest active ones."""
        if evict_count < 0:
            raise DataError("evict_count must be >= 0")
        if evict_count > len(self._active):
            raise DataError(
                f"cannot evict {evict_count} chunks, only {len(self._active)} active"
            )
        chunk_id = self.register(values, label)
        del self._active[:evict_count]
        self._active.append(chunk_id)
        self._active_cache = None
        return self.active_dims

    def slide_to(self, chunk_id: int, evict_count: int) -> int:
        """Like :meth:`slide_window` but activates an already-registered chunk."""
        if evict_count > len(self._active):
            raise DataError(
                f"cannot evict {evict_count} chunks, only {len(self._active)} active"
            )
        if chunk_id in self._active:
            raise DataError(f"chunk {chunk_id} is already active")
        del self._active[:evict_count]
        return self.activate(chunk_id)

    # -- views ----------------------------------------------------------

    @property
    def chunk_count(self) -> int:
        return len(self._chunks)

    @property
    def active_ids(self) -> tuple[int, ...]:
        return tuple(self._active)

    @property
    def inactive_ids(self) -> tuple[int, ...]:
        active = set(self._active)
        return tuple(c.chunk_id for c in self._chunks if c.chunk_id not in active)

    @property
    def active_dims(self) -> int:
        return sum(self._chunks[i].width for i in self._active)

    def chunk(self, chunk_id: int) -> ColumnChunk:
        return self._chunks[chunk_id]

    def active_chunks(self) -> list[ColumnChunk]:
        return [self._chunks[i] for i in self._active]

    def active_array(self) -> np.ndarray:
        """Concatenated active columns as one (n, active_dims) array.

        Rebuilt lazily after each activation; distance kernels run on this
        flat view, which is numerically identical to chunk-by-chunk
        accumulation (covered by tests).
        """
        if not self._active:
            raise DataError("no active chunks")
        if self._active_cache is None:
            self._active_cache = np.concatenate(
                [self._chunks[i].values for i in self._active], axis=1
            )
            self._active_cache.setflags(write=False)
        return self._active_cache


# -- CSV loading ---------------------------------------------------------


def _parse_csv_rows(path: Path) -> tuple[list[str] | None, np.ndarray]:
    """Parse a numeric CSV; returns (header, values). Header is auto-detected:
    if any cell of the first row fails to parse as a number, the row is a header.
    Errors cite 1-based (row, column) positions in the file."""
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise DataError(f"{path}: empty file")

    rows = [ln.split(",") for ln in lines]
    header = None
    first = rows[0]
    try:
        [float(cell) for cell in first]
    except ValueError:
        header = [cell.strip() for cell in first]
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: no data rows after header")

    width = len(rows[0])
    offset = 2 if header is not None else 1  # file row number of the first data row
    parsed = np.empty((len(rows), width), dtype=np.float64)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{path}: row {r + offset} has {len(row)} columns, expected {width}"
            )
        for c, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell.strip()!r} at ({r + offset},{c + 1})"
                ) from None
            if not math.isfinite(value):
                raise DataError(
                    f"{path}: non-finite value {cell.strip()!r} at ({r + offset},{c + 1})"
                )
            parsed[r, c] = value
    return header, parsed


def load_csv(path, chunk_width: int) -> DataMatrix:
    """Load a rectangular numeric CSV and partition its columns left to right
    into chunks of `chunk_width` (the last chunk may be narrower).

    All chunks start inactive; the caller activates them progressively.
    """
    if chunk_width < 1:
        raise DataError("chunk_width must be >= 1")
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    _, values = _parse_csv_rows(path)
    matrix = DataMatrix(values.shape[0])
    for start in range(0, values.shape[1], chunk_width):
        matrix.register(values[:, start : start + chunk_width])
    return matrix


def load_chunk_dir(path) -> DataMatrix:
    """Load a directory of CSV files as one chunk per file.

    Lexicographic filename order defines chunk order (the usual layout for
    data stored as individual time steps); chunks are labeled by filename.
    """
    path = Path(path)
    if not path.is_dir():
        raise DataError(f"{path}: not a directory")
    files = sorted(path.glob("*.csv"))
    if not files:
        raise DataError(f"{path}: no *.csv files found")

    matrix = None
    for f in files:
        _, values = _parse_csv_rows(f)
        if matrix is None:
            matrix = DataMatrix(values.shape[0])
        elif values.shape[0] != matrix.point_count:
            raise DataError(
                f"{f}: has {values.shape[0]} rows, expected {matrix.point_count} "
                f"(all chunk files must share the row count)"
            )
        matrix.register(values, label=f.name)
    return matrix


# -- synthetic data -------------------------------------------------------

SYNTHETIC_KINDS = ("uniform-random", "smooth-temporal-walk", "plane-embedded")


@dataclass(frozen=True)
class SyntheticSpec:
    """Deterministic synthetic dataset description: equal specs generate
    byte-identical data."""

    kind: str
    point_count: int
    dimension_count: int
    seed: int
    walk_scale: float = 0.05  # smooth-temporal-walk: per-dimension Gaussian step std
    intrinsic_dim: int = 2  # plane-embedded: dimension of the affine subspace
    noise_scale: float = 0.0  # plane-embedded: isotropic Gaussian noise std

    def __post_init__(self):
        if self.kind not in SYNTHETIC_KINDS:
            raise DataError(f"unknown synthetic kind {self.kind!r}; choose from {SYNTHETIC_KINDS}")
        if self.point_count < 1 or self.dimension_count < 1:
            raise DataError("point_count and dimension_count must be >= 1")
        if self.kind == "plane-embedded":
            if not 1 <= self.intrinsic_dim <= self.dimension_count:
                raise DataError("intrinsic_dim must be in [1, dimension_count]")
            if self.noise_scale < 0:
                raise DataError("noise_scale must be >= 0")
        if self.kind == "smooth-temporal-walk" and self.walk_scale < 0:
            raise DataError("walk_scale must be >= 0")


def generate_values(spec: SyntheticSpec) -> np.ndarray:
    """Generate the raw (point_count, dimension_count) array for a spec."""
    rng = np.random.default_rng(spec.seed)
    n, d = spec.point_count, spec.dimension_count

    if spec.kind == "uniform-random":
        return rng.random((n, d))

    if spec.kind == "smooth-temporal-walk":
        # Dimension order plays the role of time: each column is the previous
        # one plus an independent Gaussian step per point.
        start = rng.random(n)
        values = np.empty((n, d))
        values[:, 0] = start
        if d > 1:
            steps = rng.normal(0.0, spec.walk_scale, size=(n, d - 1))
            values[:, 1:] = start[:, None] + np.cumsum(steps, axis=1)
        return values

    # plane-embedded: points on a random intrinsic_dim-dimensional affine
    # subspace of the ambient space, plus optional isotropic noise.
    basis, _ = np.linalg.qr(rng.normal(size=(d, spec.intrinsic_dim)))
    coords = rng.random((n, spec.intrinsic_dim))
    offset = rng.random(d)
    values = coords @ basis.T + offset
    if spec.noise_scale > 0:
        values = values + rng.normal(0.0, spec.noise_scale, size=(n, d))
    return values


def generate(spec: SyntheticSpec, chunk_width: int | None = None) -> DataMatrix:
    """Generate a synthetic DataMatrix with all chunks inactive.

    With chunk_width=None the whole dataset becomes a single chunk.
    """
    values = generate_values(spec)
    matrix = DataMatrix(spec.point_count)
    width = spec.dimension_count if chunk_width is None else int(chunk_width)
    if width < 1:
        raise DataError("chunk_width must be >= 1")
    for start in range(0, spec.dimension_count, width):
        matrix.register(values[:, start : start + width])
    return matrix
