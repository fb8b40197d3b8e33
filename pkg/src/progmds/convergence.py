"""Stress smoothing and termination testing.

The raw per-iteration stress sequence is noisy because half of every
neighbor set is resampled each iteration, so convergence is decided on a
windowed-sinc smoothed version of the sequence instead. A refinement pass
starts with a short filter so it can terminate after few iterations when the
warm start is already close; whenever the run outlasts the current window,
the filter is lengthened in fixed steps up to the full-length filter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "sinc_kernel",
    "smoothed_stress",
    "ConvergenceConfig",
    "ConvergenceState",
    "check_converged",
    "StressTrace",
]

_kernel_cache: dict[tuple[int, float], np.ndarray] = {}


def sinc_kernel(length: int, cutoff: float) -> np.ndarray:
    """Low-pass windowed-sinc FIR coefficients.

    sinc(2*cutoff*(i - (length-1)/2)) tapered by a Hamming window and
    normalized to unit DC gain (coefficients sum to exactly 1). cutoff is a
    normalized frequency in cycles/sample, 0 < cutoff < 0.5.
    """
    if length < 2:
        raise ValueError("filter length must be >= 2")
    if not 0.0 < cutoff < 0.5:
        raise ValueError("cutoff must be in (0, 0.5)")
    key = (int(length), float(cutoff))
    kernel = _kernel_cache.get(key)
    if kernel is None:
        m = np.arange(length) - (length - 1) / 2.0
        kernel = np.sinc(2.0 * cutoff * m) * np.hamming(length)
        kernel /= kernel.sum()
        kernel.setflags(write=False)
        _kernel_cache[key] = kernel
    return kernel


def smoothed_stress(raw, filter_length: int, cutoff: float) -> float | None:
    """Dot product of the kernel with the most recent `filter_length` samples.

    Returns None (not ready) while fewer than filter_length samples exist;
    no partial-window extrapolation.
    """
    raw = getattr(raw, "raw", raw)
    if len(raw) < filter_length:
        return None
    tail = np.asarray(raw[-filter_length:], dtype=np.float64)
    return float(sinc_kernel(filter_length, cutoff) @ tail)


@dataclass
class ConvergenceConfig:
    """Termination tunables. base == max gives the fixed-length batch regime;
    the adaptive short-filter schedule is for warm-started refinement."""

    base_filter_length: int = 10
    max_filter_length: int = 50
    length_step: int = 10
    cutoff: float = 0.05
    rel_tolerance: float = 1e-3
    min_iterations: int | None = None  # None: the current filter length

    def __post_init__(self):
        if self.base_filter_length < 2:
            raise ValueError("base_filter_length must be >= 2")
        if self.base_filter_length > self.max_filter_length:
            raise ValueError("base_filter_length must be <= max_filter_length")
        if self.length_step < 1:
            raise ValueError("length_step must be >= 1")
        if (self.max_filter_length - self.base_filter_length) % self.length_step != 0:
            raise ValueError("length_step must divide (max - base) filter length")
        if not 0.0 < self.cutoff < 0.5:
            raise ValueError("cutoff must be in (0, 0.5)")
        if self.rel_tolerance <= 0:
            raise ValueError("rel_tolerance must be > 0")


@dataclass
class ConvergenceState:
    """Per-refinement-pass filter state; create fresh for every pass.

    The filter length only grows within a pass and resets to the base length
    when the next pass starts.
    """

    filter_length: int


def check_converged(raw, config: ConvergenceConfig, state: ConvergenceState) -> bool:
    """Termination test on the raw stress samples of the current pass.

    Converged when two consecutive smoothed values differ by less than
    rel_tolerance in relative terms. While not converged, the filter length
    grows by length_step once the sample count outruns the current window by
    a full step, capped at max_filter_length.
    """
    raw = getattr(raw, "raw", raw)
    n = len(raw)
    length = state.filter_length
    min_iters = config.min_iterations if config.min_iterations is not None else length

    if n >= max(length + 1, min_iters):
        now = smoothed_stress(raw, length, config.cutoff)
        prev = smoothed_stress(raw[:-1], length, config.cutoff)
        rel = abs(now - prev) / max(prev, 1e-12)
        if rel < config.rel_tolerance:
            return True

    if n >= length + config.length_step and length < config.max_filter_length:
        state.filter_length = min(length + config.length_step, config.max_filter_length)
    return False


@dataclass
class StressTrace:
    """Per-iteration stress records across a whole run.

    One row per layout iteration: the pass it belongs to (progression step or
    hierarchy level), the iteration number within that pass, the raw sparse
    sample, the smoothed value (NaN while the filter window is not yet full),
    and the filter length in effect when the value was smoothed.
    """

    steps: list[int] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    raw: list[float] = field(default_factory=list)
    smoothed: list[float] = field(default_factory=list)
    filter_lengths: list[int] = field(default_factory=list)

    def append(self, step, iteration, raw_value, smoothed_value, filter_length):
        self.steps.append(int(step))
        self.iterations.append(int(iteration))
        self.raw.append(float(raw_value))
        self.smoothed.append(float("nan") if smoothed_value is None else float(smoothed_value))
        self.filter_lengths.append(int(filter_length))

    def extend(self, other: "StressTrace"):
        self.steps.extend(other.steps)
        self.iterations.extend(other.iterations)
        self.raw.extend(other.raw)
        self.smoothed.extend(other.smoothed)
        self.filter_lengths.extend(other.filter_lengths)

    def __len__(self) -> int:
        return len(self.raw)

    def rows(self):
        return list(
            zip(self.steps, self.iterations, self.raw, self.smoothed, self.filter_lengths)
        )
