import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from a2x.errors import ValidationError
from a2x.features import Norm, PositionMatrix, distance_matrix
from a2x.grouping import Grouping, KMeansConfig, kmeans, lloyd, silhouette

from helpers import adjusted_rand_index, partition_sets


def positions(rows):
    rows = np.asarray(rows, dtype=np.float64)
    return PositionMatrix(num_classes=rows.shape[0], dim=rows.shape[1], rows=rows)


def planted_positions(rng, k=10, x=3, dim=4, spread=1.0, factor=20.0):
    centers = np.zeros((x, dim))
    for g in range(x):
        centers[g, g] = factor * spread / np.sqrt(2.0)
    labels = [y % x for y in range(k)]
    rows = np.stack([centers[labels[y]] + spread * rng.standard_normal(dim) for y in range(k)])
    return positions(rows), labels


class TestKMeans:
    def test_x_equals_k_gives_singletons(self):
        rng = np.random.default_rng(0)
        p = positions(rng.standard_normal((6, 3)))
        g = kmeans(p, KMeansConfig(num_groups=6, seed=1))
        assert partition_sets(g.groups) == {frozenset([y]) for y in range(6)}
        wcss = sum(
            float(np.sum((p.rows[m] - p.rows[m].mean(axis=0)) ** 2)) for m in g.groups
        )
        assert wcss == 0.0

    def test_x_one_single_group(self):
        rng = np.random.default_rng(1)
        p = positions(rng.standard_normal((5, 2)))
        g = kmeans(p, KMeansConfig(num_groups=1, seed=0))
        assert g.groups == [[0, 1, 2, 3, 4]]

    def test_x_above_k_rejected(self):
        p = positions(np.zeros((3, 2)))
        with pytest.raises(ValidationError):
            kmeans(p, KMeansConfig(num_groups=4, seed=0))

    def test_recovers_planted_partition(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            p, labels = planted_positions(rng)
            g = kmeans(p, KMeansConfig(num_groups=3, seed=seed))
            assert adjusted_rand_index(list(g.assign), labels) == 1.0

    def test_deterministic_under_config(self):
        rng = np.random.default_rng(5)
        p = positions(rng.standard_normal((8, 3)))
        cfg = KMeansConfig(num_groups=3, seed=99)
        g1 = kmeans(p, cfg)
        g2 = kmeans(p, cfg)
        assert np.array_equal(g1.assign, g2.assign)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_wcss_non_increasing_within_run(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(4, 12))
        x = int(rng.integers(2, k + 1))
        points = rng.standard_normal((k, 3))
        _, _, history = lloyd(points, x, np.random.default_rng(seed), 300, 0.0)
        for earlier, later in zip(history, history[1:]):
            assert later <= earlier + 1e-9

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_no_empty_groups(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(2, 10))
        x = int(rng.integers(1, k + 1))
        # duplicated points force empty-cluster repairs
        base = rng.standard_normal((max(1, k // 2), 2))
        points = base[rng.integers(0, len(base), size=k)]
        g = kmeans(positions(points), KMeansConfig(num_groups=x, seed=seed))
        g.validate()
        assert all(len(members) > 0 for members in g.groups)


class TestSilhouette:
    def line_instance(self):
        # two groups on a line: classes at 0, 1 and 10, 11
        p = positions(np.array([[0.0], [1.0], [10.0], [11.0]]))
        d = distance_matrix(p, Norm.L2)
        g = Grouping(num_classes=4, num_groups=2, assign=np.array([0, 0, 1, 1]))
        return g, d

    def test_hand_evaluated_instance(self):
        g, d = self.line_instance()
        rep = silhouette(g, d)
        assert np.allclose(rep.a, [1.0, 1.0, 1.0, 1.0], atol=1e-12, rtol=0)
        assert np.allclose(rep.b, [10.5, 9.5, 9.5, 10.5], atol=1e-12, rtol=0)
        expected = [(10.5 - 1) / 10.5, (9.5 - 1) / 9.5, (9.5 - 1) / 9.5, (10.5 - 1) / 10.5]
        assert np.allclose(rep.per_class, expected, atol=1e-12, rtol=0)
        assert abs(rep.mean - sum(expected) / 4.0) < 1e-12

    def test_singleton_groups_score_zero(self):
        rng = np.random.default_rng(2)
        p = positions(rng.standard_normal((5, 3)))
        d = distance_matrix(p, Norm.L2)
        g = Grouping(num_classes=5, num_groups=5, assign=np.arange(5))
        rep = silhouette(g, d)
        assert np.array_equal(rep.per_class, np.zeros(5))
        assert rep.mean == 0.0
        assert np.array_equal(rep.a, np.zeros(5))

    def test_identical_positions_degenerate(self):
        p = positions(np.zeros((4, 2)))
        d = distance_matrix(p, Norm.L2)
        g = Grouping(num_classes=4, num_groups=2, assign=np.array([0, 0, 1, 1]))
        rep = silhouette(g, d)
        assert np.array_equal(rep.per_class, np.zeros(4))

    def test_single_group_rejected(self):
        rng = np.random.default_rng(3)
        p = positions(rng.standard_normal((4, 2)))
        d = distance_matrix(p, Norm.L2)
        g = Grouping(num_classes=4, num_groups=1, assign=np.zeros(4, dtype=np.int64))
        with pytest.raises(ValidationError, match="two groups"):
            silhouette(g, d)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_scores_bounded(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(3, 10))
        x = int(rng.integers(2, k + 1))
        p = positions(rng.standard_normal((k, 3)) * 5)
        d = distance_matrix(p, Norm.L2)
        while True:
            assign = rng.integers(0, x, size=k)
            if len(np.unique(assign)) == x:
                break
        rep = silhouette(Grouping(num_classes=k, num_groups=x, assign=assign), d)
        assert (rep.per_class >= -1.0).all() and (rep.per_class <= 1.0).all()
        assert -1.0 <= rep.mean <= 1.0

    def test_planted_grouping_beats_random_partitions(self):
        rng = np.random.default_rng(4)
        p, labels = planted_positions(rng)
        d = distance_matrix(p, Norm.L2)
        planted = Grouping(num_classes=10, num_groups=3, assign=np.array(labels))
        planted_score = silhouette(planted, d).mean
        for _ in range(100):
            while True:
                assign = rng.integers(0, 3, size=10)
                if len(np.unique(assign)) == 3:
                    break
            if np.array_equal(assign, np.array(labels)):
                continue
            candidate = Grouping(num_classes=10, num_groups=3, assign=assign)
            if partition_sets(candidate.groups) == partition_sets(planted.groups):
                continue
            assert silhouette(candidate, d).mean < planted_score
