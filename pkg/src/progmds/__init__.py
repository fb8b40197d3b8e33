"""progmds: progressive, dimension-chunked force-approximated metric MDS.

The batch path runs the multilevel Glimmer layout on the full active window;
the progressive path grows the window chunk by chunk, warm-starting each
refinement from the previous embedding and neighbor sets so intermediate
results are available throughout.
"""

__version__ = "0.1.0"

from .convergence import (
    ConvergenceConfig,
    ConvergenceState,
    StressTrace,
    check_converged,
    sinc_kernel,
    smoothed_stress,
)
from .datamatrix import (
    ColumnChunk,
    DataError,
    DataMatrix,
    SyntheticSpec,
    generate,
    generate_values,
    load_chunk_dir,
    load_csv,
)
from .glimmer import (
    GlimmerConfig,
    GlimmerResult,
    LevelHierarchy,
    build_hierarchy,
    interpolate_new_points,
    run_glimmer,
)
from .layout import (
    Embedding,
    LayoutConfig,
    NeighborSets,
    effective_neighbor_count,
    init_neighbors,
    layout_step,
    update_neighbors,
)
from .metric import (
    ShepardSample,
    full_normalized_stress,
    high_distance,
    low_distance,
    neighbor_high_distances,
    neighbor_low_distances,
    shepard_sample,
    sparse_stress_term,
)
from .progressive import (
    ProgressiveConfig,
    ProgressiveEngine,
    ProgressSnapshot,
    SnapshotBuffer,
    run_progressive,
    run_sliding,
)

__all__ = [
    "__version__",
    "ColumnChunk",
    "ConvergenceConfig",
    "ConvergenceState",
    "DataError",
    "DataMatrix",
    "Embedding",
    "GlimmerConfig",
    "GlimmerResult",
    "LayoutConfig",
    "LevelHierarchy",
    "NeighborSets",
    "ProgressiveConfig",
    "ProgressiveEngine",
    "ProgressSnapshot",
    "ShepardSample",
    "SnapshotBuffer",
    "StressTrace",
    "SyntheticSpec",
    "build_hierarchy",
    "check_converged",
    "effective_neighbor_count",
    "full_normalized_stress",
    "generate",
    "generate_values",
    "high_distance",
    "init_neighbors",
    "interpolate_new_points",
    "layout_step",
    "load_chunk_dir",
    "load_csv",
    "low_distance",
    "neighbor_high_distances",
    "neighbor_low_distances",
    "run_glimmer",
    "run_progressive",
    "run_sliding",
    "shepard_sample",
    "sinc_kernel",
    "smoothed_stress",
    "sparse_stress_term",
    "update_neighbors",
]
