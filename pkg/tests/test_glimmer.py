import numpy as np
import pytest

from progmds.datamatrix import DataMatrix, SyntheticSpec, generate
from progmds.glimmer import (
    GlimmerConfig,
    build_hierarchy,
    interpolate_new_points,
    run_glimmer,
)
from progmds.layout import Embedding, LayoutConfig, init_neighbors, layout_step, update_neighbors
from progmds.metric import full_normalized_stress


def active_matrix(spec, chunk_width=None):
    matrix = generate(spec, chunk_width=chunk_width)
    for cid in matrix.inactive_ids:
        matrix.activate(cid)
    return matrix


class TestHierarchy:
    def test_small_n_single_level(self):
        hier = build_hierarchy(100, decimation_factor=4, min_level_size=128, seed=0)
        assert hier.sizes == (100,)
        assert sorted(hier.level_indices(0).tolist()) == list(range(100))

    def test_forced_sizes(self):
        hier = build_hierarchy(2048, decimation_factor=4, min_level_size=128, seed=0)
        assert hier.sizes == (128, 512, 2048)

    def test_ceiling_rule(self):
        hier = build_hierarchy(5000, decimation_factor=4, min_level_size=128, seed=1)
        assert hier.sizes == (79, 313, 1250, 5000)

    def test_nesting(self):
        hier = build_hierarchy(1000, seed=2)
        for level in range(hier.level_count - 1):
            lower = set(hier.level_indices(level).tolist())
            upper = set(hier.level_indices(level + 1).tolist())
            assert lower < upper

    def test_deterministic(self):
        a = build_hierarchy(500, seed=3)
        b = build_hierarchy(500, seed=3)
        np.testing.assert_array_equal(a.order, b.order)


class TestInterpolation:
    def test_new_point_lands_near_reference(self):
        rng = np.random.default_rng(0)
        X = np.array([[0.0, 0.0], [10.0, 10.0], [0.1, 0.1]])  # point 2 is closest to point 0
        positions = np.array([[2.0, 3.0], [50.0, 60.0], [0.0, 0.0]])
        interpolate_new_points(X, positions, placed_count=2, k=8, rng=rng)
        # jitter is uniform within 1% of the placed bounding-box diagonal
        radius = 0.01 * np.hypot(48.0, 57.0) * np.sqrt(2)
        assert np.linalg.norm(positions[2] - [2.0, 3.0]) <= radius

    def test_zero_new_points_noop(self):
        positions = np.arange(10.0).reshape(5, 2)
        snapshot = positions.copy()
        interpolate_new_points(np.zeros((5, 3)), positions, placed_count=5, k=4,
                               rng=np.random.default_rng(1))
        np.testing.assert_array_equal(positions, snapshot)

    def test_warm_start_beats_random_placement(self):
        # paired runs: interpolated placement + fixed relaxation budget should
        # beat random placement + the same budget (median over 10 seeds)
        spec = SyntheticSpec(
            kind="plane-embedded", point_count=300, dimension_count=10, seed=4,
            intrinsic_dim=2, noise_scale=0.0,
        )
        matrix = active_matrix(spec)
        X = matrix.active_array()
        config = LayoutConfig()
        placed = 60

        def relax_and_score(positions, seed):
            rng = np.random.default_rng(seed)
            emb = Embedding(positions)
            nbrs = init_neighbors(300, 8, rng)
            for _ in range(50):
                layout_step(X, emb, nbrs, config)
                update_neighbors(X, nbrs, rng)
            return full_normalized_stress(matrix, emb)

        wins = []
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            # a reasonable partial layout: the true plane coordinates of the
            # first `placed` points, scaled into a unit box
            base = X[:placed, :2] - X[:placed, :2].min(axis=0)
            base = base / base.max()
            warm = np.zeros((300, 2))
            warm[:placed] = base
            interpolate_new_points(X, warm, placed_count=placed, k=8, rng=rng)
            cold = rng.random((300, 2))
            cold[:placed] = base
            wins.append(relax_and_score(warm, seed) - relax_and_score(cold, seed))
        assert np.median(wins) < 0


class TestRunGlimmer:
    def test_equilateral_triangle(self):
        # closed-form optimum: unit pairwise distances
        data = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        matrix = DataMatrix(3)
        matrix.append_chunk(data)
        result = run_glimmer(matrix, GlimmerConfig(seed=0))
        pos = result.embedding.positions
        for i in range(3):
            for j in range(i + 1, 3):
                assert np.linalg.norm(pos[i] - pos[j]) == pytest.approx(1.0, rel=0.05)

    def test_plane_recovery(self):
        spec = SyntheticSpec(
            kind="plane-embedded", point_count=500, dimension_count=10, seed=5,
            intrinsic_dim=2, noise_scale=0.0,
        )
        matrix = active_matrix(spec, chunk_width=5)
        result = run_glimmer(matrix, GlimmerConfig(seed=5))
        assert full_normalized_stress(matrix, result.embedding) < 0.05

    def test_deterministic(self):
        spec = SyntheticSpec(kind="uniform-random", point_count=150, dimension_count=8, seed=6)
        matrix = active_matrix(spec)
        a = run_glimmer(matrix, GlimmerConfig(seed=7))
        b = run_glimmer(matrix, GlimmerConfig(seed=7))
        np.testing.assert_array_equal(a.embedding.positions, b.embedding.positions)
        np.testing.assert_array_equal(a.neighbors.members(), b.neighbors.members())

    def test_single_level_for_small_n(self):
        spec = SyntheticSpec(kind="uniform-random", point_count=60, dimension_count=5, seed=8)
        matrix = active_matrix(spec)
        result = run_glimmer(matrix, GlimmerConfig(seed=8))
        assert result.hierarchy.sizes == (60,)
        assert len(result.iterations_per_level) == 1

    def test_per_level_stress_does_not_diverge(self):
        # smoothed stress at the end of each level <= at its start
        spec = SyntheticSpec(kind="uniform-random", point_count=400, dimension_count=10, seed=9)
        matrix = active_matrix(spec)
        result = run_glimmer(matrix, GlimmerConfig(seed=9))
        rows = result.trace.rows()
        for level in range(len(result.iterations_per_level)):
            level_raw = [r[2] for r in rows if r[0] == level]
            assert len(level_raw) >= 20
            first = np.median(level_raw[:10])
            last = np.median(level_raw[-10:])
            assert last <= first

    def test_neighbor_sets_returned_in_original_order(self):
        spec = SyntheticSpec(kind="uniform-random", point_count=200, dimension_count=6, seed=10)
        matrix = active_matrix(spec)
        result = run_glimmer(matrix, GlimmerConfig(seed=10))
        members = result.neighbors.members()
        assert members.shape == (200, 8)
        for i in range(200):
            assert i not in members[i]
            assert len(set(members[i].tolist())) == 8
