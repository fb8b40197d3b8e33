"""Command-line front end: dataset generation, batch/progressive/sliding runs,
and paired-experiment benchmark suites.

Every run writes a self-describing output directory: `manifest.json` (all
resolved settings, seeds, input digest, timings, file inventory), delimited
CSV outputs, and rendered PNG figures alongside them. Re-running from a
manifest reproduces the numeric outputs exactly; timing fields are the only
values that vary between reruns.

Exit codes: 0 success, 2 usage error, 1 runtime failure. Diagnostics go to
stderr; data goes to files (and paths to stdout).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, figures
from .convergence import ConvergenceConfig
from .datamatrix import (
    DataError,
    DataMatrix,
    SyntheticSpec,
    generate_values,
    load_chunk_dir,
    load_csv,
)
from .glimmer import GlimmerConfig, run_glimmer
from .layout import LayoutConfig
from .metric import full_normalized_stress, shepard_sample
from .progressive import ProgressiveConfig, ProgressiveEngine

_KIND_ALIASES = {
    "uniform": "uniform-random",
    "uniform-random": "uniform-random",
    "walk": "smooth-temporal-walk",
    "smooth-temporal-walk": "smooth-temporal-walk",
    "plane": "plane-embedded",
    "plane-embedded": "plane-embedded",
}

_SUITE_DEFAULT = object()  # bench flag sentinel: resolve per suite

FULL_STRESS_AUTO_POINT_LIMIT = 5000  # above this, default --full-stress drops to "final"


# -- small output helpers --------------------------------------------------


def _fmt(value) -> str:
    """Full-precision, round-trip-exact cell formatting."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value):
            return ""
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_embedding(path: Path, positions: np.ndarray) -> Path:
    rows = ((i, positions[i, 0], positions[i, 1]) for i in range(len(positions)))
    return _write_csv(path, ["point_id", "x", "y"], rows)


def _sha256_of_input(path: Path) -> str:
    digest = hashlib.sha256()
    if path.is_dir():
        for f in sorted(path.glob("*.csv")):
            digest.update(f.name.encode())
            digest.update(f.read_bytes())
    else:
        digest.update(path.read_bytes())
    return digest.hexdigest()


def _max_iters(text: str):
    if text == "unlimited":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'unlimited'") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1 or 'unlimited'")
    return value


# -- generate ----------------------------------------------------------------


def _spec_from_args(args, parser) -> SyntheticSpec:
    kind = _KIND_ALIASES.get(args.kind)
    if kind is None:
        parser.error(f"unknown --kind {args.kind!r}")
    if args.points < 1:
        parser.error("--points must be >= 1")
    if args.dims < 1:
        parser.error("--dims must be >= 1")
    return SyntheticSpec(
        kind=kind,
        point_count=args.points,
        dimension_count=args.dims,
        seed=args.seed,
        walk_scale=args.walk_scale,
        intrinsic_dim=args.intrinsic,
        noise_scale=args.noise,
    )


def cmd_generate(args, parser) -> int:
    spec = _spec_from_args(args, parser)
    values = generate_values(spec)
    out = Path(args.out)

    if out.suffix == ".csv":
        out.parent.mkdir(parents=True, exist_ok=True)
        rows = (tuple(row) for row in values)
        _write_csv(out, [f"d{c}" for c in range(values.shape[1])], rows)
        print(out)
        return 0

    if args.chunk_width is None:
        parser.error("writing a chunk directory requires --chunk-width")
    out.mkdir(parents=True, exist_ok=True)
    starts = range(0, values.shape[1], args.chunk_width)
    pad = max(3, len(str(len(starts) - 1)))
    for index, start in enumerate(starts):
        block = values[:, start : start + args.chunk_width]
        path = out / f"chunk_{index:0{pad}d}.csv"
        _write_csv(path, [f"d{start + c}" for c in range(block.shape[1])],
                   (tuple(row) for row in block))
        print(path)
    return 0


# -- run ---------------------------------------------------------------------


def _load_input(args) -> tuple[DataMatrix, dict]:
    path = Path(args.input)
    if not path.exists():
        raise DataError(f"{path}: no such file or directory")
    if path.is_dir():
        matrix = load_chunk_dir(path)
        kind = "chunk-dir"
    else:
        matrix = load_csv(path, args.chunk_width)
        kind = "csv"
    total_dims = sum(matrix.chunk(i).width for i in range(matrix.chunk_count))
    info = {
        "input_path": str(path),
        "input_kind": kind,
        "input_digest_sha256": _sha256_of_input(path),
        "point_count": matrix.point_count,
        "chunk_count": matrix.chunk_count,
        "total_dims": total_dims,
    }
    return matrix, info


def _configs_from_args(args) -> tuple[LayoutConfig, ConvergenceConfig, GlimmerConfig]:
    layout = LayoutConfig(
        neighbor_count=args.k,
        step_size=args.step_size,
        damping=args.damping,
    )
    convergence = ConvergenceConfig(rel_tolerance=args.rel_tolerance)
    glimmer = GlimmerConfig(layout=layout, seed=args.seed)
    return layout, convergence, glimmer


def _run_manifest(args, info, full_stress: str) -> dict:
    layout, convergence, glimmer = _configs_from_args(args)
    manifest = {
        "tool": "progmds",
        "tool_version": __version__,
        "command": "run",
        "mode": args.mode,
        "seed": args.seed,
        "order": args.order,
        "order_seed": args.order_seed,
        "init": args.init,
        "chunk_width": args.chunk_width,
        "max_iterations": "unlimited" if args.max_iters is None else args.max_iters,
        "emit_every": args.emit_every,
        "evict": args.evict,
        "window": args.window,
        "full_stress": full_stress,
        "shepard_pairs": args.shepard_pairs,
        "figures": not args.no_figures,
        "layout_neighbor_count": layout.neighbor_count,
        "layout_step_size": layout.step_size,
        "layout_damping": layout.damping,
        "layout_min_distance_epsilon": layout.min_distance_epsilon,
        "convergence_base_filter_length": convergence.base_filter_length,
        "convergence_max_filter_length": convergence.max_filter_length,
        "convergence_length_step": convergence.length_step,
        "convergence_cutoff": convergence.cutoff,
        "convergence_rel_tolerance": convergence.rel_tolerance,
        "glimmer_decimation_factor": glimmer.decimation_factor,
        "glimmer_min_level_size": glimmer.min_level_size,
        "glimmer_max_iterations_per_level": glimmer.max_iterations_per_level,
        "glimmer_filter_length": glimmer.convergence.base_filter_length,
        "stress_window": "active",  # full stress is taken over the active window
    }
    manifest.update(info)
    return manifest


_MANIFEST_ARG_KEYS = {
    # manifest key -> args attribute
    "mode": "mode",
    "seed": "seed",
    "order": "order",
    "order_seed": "order_seed",
    "init": "init",
    "chunk_width": "chunk_width",
    "emit_every": "emit_every",
    "evict": "evict",
    "window": "window",
    "shepard_pairs": "shepard_pairs",
    "layout_neighbor_count": "k",
    "layout_step_size": "step_size",
    "layout_damping": "damping",
    "convergence_rel_tolerance": "rel_tolerance",
    "input_path": "input",
}


def _args_from_manifest(manifest_path: Path, out_dir: str) -> argparse.Namespace:
    manifest = json.loads(manifest_path.read_text())
    args = argparse.Namespace()
    for key, attr in _MANIFEST_ARG_KEYS.items():
        setattr(args, attr, manifest[key])
    z = manifest["max_iterations"]
    args.max_iters = None if z == "unlimited" else int(z)
    args.full_stress = manifest["full_stress"]
    args.no_figures = not manifest["figures"]
    args.out = out_dir
    args.from_manifest = None
    expected = manifest["input_digest_sha256"]
    actual = _sha256_of_input(Path(args.input))
    if actual != expected:
        raise DataError(
            f"input {args.input} does not match the manifest digest "
            f"(expected {expected[:12]}..., got {actual[:12]}...)"
        )
    return args


def cmd_run(args, parser) -> int:
    if args.from_manifest:
        args = _args_from_manifest(Path(args.from_manifest), args.out)

    if args.mode != "sliding":
        if args.evict is not None:
            parser.error("--evict only applies to --mode sliding")
        if args.window is not None:
            parser.error("--window only applies to --mode sliding")

    matrix, info = _load_input(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    full_stress = args.full_stress
    if full_stress is None:
        full_stress = (
            "per-chunk" if matrix.point_count <= FULL_STRESS_AUTO_POINT_LIMIT else "final"
        )
    manifest = _run_manifest(args, info, full_stress)
    outputs: list[Path] = []

    if args.mode == "batch":
        summary_rows, trace_rows, final_positions, shepards = _execute_batch(
            args, matrix, full_stress, out_dir, outputs
        )
    else:
        summary_rows, trace_rows, final_positions, shepards = _execute_progressive(
            args, matrix, full_stress, out_dir, outputs
        )

    outputs.append(_write_csv(
        out_dir / "stress_trace.csv",
        ["step", "iteration", "raw", "smoothed", "filter_length"],
        trace_rows,
    ))
    outputs.append(_write_csv(
        out_dir / "summary.csv",
        ["step", "active_dims", "iterations_used", "full_normalized_stress", "duration_ms"],
        [
            (r["step"], r["active_dims"], r["iterations_used"],
             r["full_normalized_stress"], r["duration_ms"])
            for r in summary_rows
        ],
    ))
    for step, sample in shepards:
        outputs.append(_write_csv(
            out_dir / f"shepard_step_{step}.csv", ["high", "low"],
            zip(sample.high, sample.low),
        ))

    if not args.no_figures:
        outputs.append(figures.save_stress_figure(summary_rows, trace_rows,
                                                  out_dir / "stress_curve.png"))
        outputs.append(figures.save_embedding_figure(final_positions,
                                                     out_dir / "embedding_final.png"))
        if shepards:
            sample = shepards[-1][1]
            outputs.append(figures.save_shepard_figure(sample.high, sample.low,
                                                       out_dir / "shepard_final.png"))

    manifest["per_step_duration_ms"] = [r["duration_ms"] for r in summary_rows]
    manifest["output_files"] = sorted(p.name for p in outputs) + ["manifest.json"]
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(out_dir)
    return 0


def _execute_batch(args, matrix, full_stress, out_dir, outputs):
    for chunk_id in matrix.inactive_ids:
        matrix.activate(chunk_id)
    _, _, glimmer_config = _configs_from_args(args)

    t0 = time.perf_counter()
    result = run_glimmer(matrix, glimmer_config)
    duration_ms = (time.perf_counter() - t0) * 1000.0

    stress = None
    if full_stress != "never":
        stress = full_normalized_stress(matrix, result.embedding)
    summary_rows = [{
        "step": 0,
        "active_dims": matrix.active_dims,
        "iterations_used": result.total_iterations,
        "full_normalized_stress": stress,
        "duration_ms": duration_ms,
    }]
    positions = result.embedding.positions
    outputs.append(_write_embedding(out_dir / "embedding_step_0.csv", positions))

    shepards = []
    if args.shepard_pairs > 0:
        shepards.append((0, shepard_sample(matrix, positions, args.shepard_pairs, args.seed)))
    return summary_rows, result.trace.rows(), positions, shepards


def _execute_progressive(args, matrix, full_stress, out_dir, outputs):
    layout, convergence, glimmer_config = _configs_from_args(args)
    config = ProgressiveConfig(
        layout=layout,
        convergence=convergence,
        max_iterations=args.max_iters,
        emit_every=args.emit_every,
        init_mode=args.init,
        order="given" if args.order == "temporal" else args.order,
        order_seed=args.order_seed,
        mode="sliding" if args.mode == "sliding" else "append",
        evict_count=1 if args.evict is None else args.evict,
        window_dims=args.window,
        full_stress=full_stress,
        seed=args.seed,
        glimmer=glimmer_config,
    )

    shepards = []

    def observer(snapshot):
        if not snapshot.is_final:
            if args.emit_every is not None:
                path = out_dir / f"embedding_step_{snapshot.step}_iter_{snapshot.iteration}.csv"
                outputs.append(_write_embedding(path, snapshot.positions))
            return
        if args.shepard_pairs > 0 and snapshot.full_stress is not None:
            shepards.append((
                snapshot.step,
                shepard_sample(matrix, snapshot.positions, args.shepard_pairs, args.seed),
            ))

    engine = ProgressiveEngine(matrix, config, observer=observer)
    snapshots = engine.run()

    if args.shepard_pairs > 0 and not shepards:  # e.g. --full-stress never
        final = snapshots[-1]
        shepards.append((
            final.step,
            shepard_sample(matrix, final.positions, args.shepard_pairs, args.seed),
        ))

    summary_rows = []
    for snap in snapshots:
        outputs.append(_write_embedding(out_dir / f"embedding_step_{snap.step}.csv",
                                        snap.positions))
        summary_rows.append({
            "step": snap.step,
            "active_dims": snap.active_dims,
            "iterations_used": snap.iterations_used,
            "full_normalized_stress": snap.full_stress,
            "duration_ms": snap.duration_s * 1000.0,
        })
    return summary_rows, engine.trace.rows(), snapshots[-1].positions, shepards


# -- bench -------------------------------------------------------------------


def _bench_matrix(kind, points, dims, seed, chunk_width, walk_scale=0.05):
    spec = SyntheticSpec(kind=kind, point_count=points, dimension_count=dims, seed=seed,
                         walk_scale=walk_scale)
    values = generate_values(spec)
    matrix = DataMatrix(points)
    for start in range(0, dims, chunk_width):
        matrix.register(values[:, start : start + chunk_width])
    return matrix, values


def _fresh_batch_stress(values, layout, seed) -> float:
    matrix = DataMatrix(values.shape[0])
    matrix.append_chunk(values)
    result = run_glimmer(matrix, GlimmerConfig(layout=layout, seed=seed))
    return full_normalized_stress(matrix, result.embedding)


_BENCH_DEFAULTS = {
    # suite: (max_iters, step_size)
    "runtime": (None, 0.1),  # quality unconstrained by latency, as in the runtime comparison
    "overlap-sweep": (3, 0.0125),  # tight budget + averaged spring so window changes bind
    "order-compare": (100, 0.1),
}


def cmd_bench(args, parser) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    default_z, default_eta = _BENCH_DEFAULTS[args.suite]
    if args.max_iters is _SUITE_DEFAULT:
        args.max_iters = default_z
    if args.step_size is None:
        args.step_size = default_eta
    if args.suite == "runtime":
        report = _bench_runtime(args, out_dir)
    elif args.suite == "overlap-sweep":
        report = _bench_overlap(args, out_dir)
    else:
        report = _bench_order(args, out_dir)
    (out_dir / "bench_manifest.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(out_dir)
    return 0


def _bench_runtime(args, out_dir: Path) -> dict:
    layout = LayoutConfig(neighbor_count=args.k, step_size=args.step_size, damping=args.damping)
    matrix, values = _bench_matrix("uniform-random", args.points, args.dims, args.seed,
                                   args.chunk_width)

    batch_matrix = DataMatrix(args.points)
    batch_matrix.append_chunk(values)
    t0 = time.perf_counter()
    run_glimmer(batch_matrix, GlimmerConfig(layout=layout, seed=args.seed))
    batch_total_s = time.perf_counter() - t0

    config = ProgressiveConfig(layout=layout, max_iterations=args.max_iters,
                               init_mode="first2", full_stress="never", seed=args.seed)
    engine = ProgressiveEngine(matrix, config)
    snapshots = engine.run()
    step_durations = [s.duration_s for s in snapshots]

    rows = [("batch", "", batch_total_s * 1000.0)]
    rows += [("progressive", s.step, s.duration_s * 1000.0) for s in snapshots]
    _write_csv(out_dir / "runtime.csv", ["kind", "step", "duration_ms"], rows)
    figures.save_runtime_figure(step_durations, batch_total_s, out_dir / "runtime.png")

    return {
        "suite": "runtime",
        "points": args.points,
        "dims": args.dims,
        "chunk_width": args.chunk_width,
        "seed": args.seed,
        "batch_total_ms": batch_total_s * 1000.0,
        "median_step_ms": float(np.median(step_durations)) * 1000.0,
        "max_step_ms": float(np.max(step_durations)) * 1000.0,
    }


def _bench_overlap(args, out_dir: Path) -> dict:
    """Window-change degradation under a fixed refinement budget.

    Per (change %, seed): converge a sliding window warm-started step by
    step, then apply ONE slide that replaces change% of the window and
    refine it with the (small) iteration budget only. The ratio against a
    fresh batch run on the final window isolates how much quality the
    budget-limited adaptation gives up.
    """
    layout = LayoutConfig(neighbor_count=args.k, step_size=args.step_size, damping=args.damping)
    change_pcts = [int(c) for c in args.changes.split(",")]
    detail_rows = []
    ratios_by_pct: dict[int, list[float]] = {}

    for pct in change_pcts:
        chunk_width = max(1, round(args.window * pct / 100))
        window_chunks = max(1, round(args.window / chunk_width))
        window_dims = window_chunks * chunk_width
        actual_pct = 100.0 * chunk_width / window_dims
        dims = window_dims + chunk_width
        ratios = []
        for seed in range(args.seeds):
            matrix, values = _bench_matrix("uniform-random", args.points, dims, seed, chunk_width)
            config = ProgressiveConfig(
                layout=layout, max_iterations=args.max_iters, init_mode="first2",
                mode="sliding", evict_count=1, window_dims=window_dims,
                full_stress="never", seed=seed,
            )
            engine = ProgressiveEngine(matrix, config)
            engine.initialize()
            engine.refine(None)  # converge the warm-up windows
            while matrix.active_dims < window_dims:
                engine.advance()
                engine.refine(None)
            engine.advance()  # the measured slide
            engine.refine(args.max_iters)
            stress_sliding = full_normalized_stress(matrix, engine.positions)
            stress_batch = _fresh_batch_stress(values[:, chunk_width:], layout, seed)
            ratio = stress_sliding / stress_batch
            ratios.append(ratio)
            detail_rows.append((pct, actual_pct, seed, stress_sliding, stress_batch, ratio))
        ratios_by_pct[pct] = ratios

    _write_csv(out_dir / "overlap_detail.csv",
               ["change_pct", "actual_change_pct", "seed", "stress_sliding", "stress_batch", "ratio"],
               detail_rows)
    summary_rows = [
        (pct, float(np.median(r)), float(np.percentile(r, 25)), float(np.percentile(r, 75)))
        for pct, r in ratios_by_pct.items()
    ]
    _write_csv(out_dir / "overlap_summary.csv",
               ["change_pct", "ratio_median", "ratio_q25", "ratio_q75"], summary_rows)
    figures.save_overlap_figure(change_pcts, ratios_by_pct, out_dir / "overlap.png")

    return {
        "suite": "overlap-sweep",
        "points": args.points,
        "window": args.window,
        "seeds": args.seeds,
        "changes": change_pcts,
        "max_iterations": args.max_iters,
        "step_size": args.step_size,
        "ratio_medians": {str(p): float(np.median(r)) for p, r in ratios_by_pct.items()},
    }


def _bench_order(args, out_dir: Path) -> dict:
    layout = LayoutConfig(neighbor_count=args.k, step_size=args.step_size, damping=args.damping)
    detail_rows = []
    curves: dict[str, dict[int, list[float]]] = {"temporal": {}, "random": {}}

    for seed in range(args.seeds):
        for order in ("temporal", "random"):
            matrix, _ = _bench_matrix("smooth-temporal-walk", args.points, args.dims, seed,
                                      chunk_width=1, walk_scale=args.walk_scale)
            config = ProgressiveConfig(
                layout=layout, max_iterations=args.max_iters, init_mode="first2",
                order="given" if order == "temporal" else "random", order_seed=seed,
                full_stress="per-chunk", seed=seed,
            )
            engine = ProgressiveEngine(matrix, config)
            for snap in engine.run():
                detail_rows.append((order, seed, snap.step, snap.active_dims, snap.full_stress))
                curves[order].setdefault(snap.step, []).append(snap.full_stress)

    _write_csv(out_dir / "order_detail.csv",
               ["order", "seed", "step", "active_dims", "full_normalized_stress"], detail_rows)
    median_curves = {
        order: [(step, float(np.median(vals))) for step, vals in sorted(by_step.items())]
        for order, by_step in curves.items()
    }
    _write_csv(out_dir / "order_summary.csv", ["order", "step", "stress_median"],
               [(o, s, v) for o, pts in median_curves.items() for s, v in pts])
    figures.save_order_figure(median_curves, out_dir / "order.png")

    final = {o: pts[-1][1] for o, pts in median_curves.items()}
    return {
        "suite": "order-compare",
        "points": args.points,
        "dims": args.dims,
        "seeds": args.seeds,
        "max_iterations": args.max_iters,
        "final_stress_median": final,
    }


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="progmds",
        description="Progressive dimension-chunked metric MDS: generate data, run embeddings, benchmark.",
    )
    parser.add_argument("--version", action="version", version=f"progmds {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset as CSV or chunk directory")
    gen.add_argument("--kind", required=True,
                     help="uniform[-random] | [smooth-temporal-]walk | plane[-embedded]")
    gen.add_argument("--points", type=int, required=True)
    gen.add_argument("--dims", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--walk-scale", type=float, default=0.05)
    gen.add_argument("--intrinsic", type=int, default=2)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--chunk-width", type=int, default=None,
                     help="required when --out is a directory")
    gen.add_argument("--out", required=True, help="*.csv file or chunk directory")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="embed a dataset and write plot-ready results")
    run.add_argument("--input", help="CSV file or chunk directory")
    run.add_argument("--chunk-width", type=int, default=1,
                     help="column partition width for CSV input (default 1)")
    run.add_argument("--mode", choices=["batch", "progressive", "sliding"], default="progressive")
    run.add_argument("--max-iters", type=_max_iters, default=100, metavar="Z|unlimited",
                     help="iteration cap per progression step (default 100)")
    run.add_argument("--order", choices=["temporal", "random"], default="temporal",
                     help="chunk activation order (temporal = as stored)")
    run.add_argument("--order-seed", type=int, default=None)
    run.add_argument("--init", choices=["first2", "glimmer"], default="first2",
                     help="initial embedding: first two dimensions as axes, or a batch run on the first chunk")
    run.add_argument("--evict", type=int, default=None,
                     help="sliding mode: chunks evicted per step (default 1)")
    run.add_argument("--window", type=int, default=None,
                     help="sliding mode: start evicting once this many dims are active")
    run.add_argument("--emit-every", type=int, default=None,
                     help="also emit an embedding every N iterations within a step")
    run.add_argument("--full-stress", choices=["per-chunk", "final", "never"], default=None,
                     help="when to compute the O(n^2) normalized stress "
                          "(default: per-chunk up to 5000 points, else final)")
    run.add_argument("--shepard-pairs", type=int, default=0,
                     help="sample this many pairs for Shepard diagrams (0 = off)")
    run.add_argument("--k", type=int, default=8, help="neighbor set size (even)")
    run.add_argument("--step-size", type=float, default=0.1)
    run.add_argument("--damping", type=float, default=0.3)
    run.add_argument("--rel-tolerance", type=float, default=1e-3)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--no-figures", action="store_true")
    run.add_argument("--from-manifest", default=None,
                     help="reproduce a previous run from its manifest.json")
    run.add_argument("--out", required=True, help="output directory")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="paired-experiment suites with seeded determinism")
    bench.add_argument("suite", choices=["runtime", "overlap-sweep", "order-compare"])
    bench.add_argument("--points", type=int, default=1000)
    bench.add_argument("--dims", type=int, default=100)
    bench.add_argument("--chunk-width", type=int, default=10)
    bench.add_argument("--window", type=int, default=50)
    bench.add_argument("--changes", default="5,10,20,50",
                       help="overlap-sweep: %% of window changed by the measured slide")
    bench.add_argument("--seeds", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--max-iters", type=_max_iters, default=_SUITE_DEFAULT,
                       metavar="Z|unlimited", help="iteration budget (default per suite)")
    bench.add_argument("--walk-scale", type=float, default=0.05)
    bench.add_argument("--k", type=int, default=8)
    bench.add_argument("--step-size", type=float, default=None,
                       help="force step size (default per suite)")
    bench.add_argument("--damping", type=float, default=0.3)
    bench.add_argument("--out", required=True, help="output directory")
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "run" and not args.from_manifest and not args.input:
        parser.error("--input is required (or use --from-manifest)")
    try:
        return args.func(args, parser)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
