"""Tests for distance matrices, single linkage, cuts, and confusion."""

import numpy as np
import pytest

from trajseq import (
    ClusterLabels,
    ConfigurationError,
    Dendrogram,
    DistanceMatrix,
    FormatError,
    confusion,
    cut,
    pairwise_matrix,
    single_linkage,
)


def matrix(entries, ids=None):
    entries = np.asarray(entries, dtype=float)
    ids = ids or tuple(str(i) for i in range(entries.shape[0]))
    return DistanceMatrix(tuple(ids), entries)


HAND_TRACE = matrix([[0, 1, 5], [1, 0, 5], [5, 5, 0]])


class TestDistanceMatrix:
    def test_rejects_asymmetry(self):
        with pytest.raises(FormatError):
            matrix([[0, 1], [2, 0]])

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(FormatError):
            matrix([[0.1, 1], [1, 0]])

    def test_rejects_negative_and_nonfinite(self):
        with pytest.raises(FormatError):
            matrix([[0, -1], [-1, 0]])
        with pytest.raises(FormatError):
            matrix([[0, np.inf], [np.inf, 0]])


class TestPairwiseMatrix:
    def test_identical_items(self):
        got = pairwise_matrix(["x", "x"], lambda a, b: 0.0, ids=("a", "b"))
        assert got.entries == pytest.approx(np.zeros((2, 2)))

    def test_index_gap_metric(self):
        got = pairwise_matrix([0, 1, 2], lambda a, b: abs(a - b))
        assert got.entries == pytest.approx([[0, 1, 2], [1, 0, 1], [2, 1, 0]])

    def test_schedule_determinism(self):
        rng = np.random.default_rng(0)
        items = rng.uniform(0, 1, 12).tolist()
        metric = lambda a, b: abs(a - b) ** 1.3
        serial = pairwise_matrix(items, metric)
        threaded = pairwise_matrix(items, metric, n_jobs=4)
        assert np.array_equal(serial.entries, threaded.entries)

    def test_metric_errors_identify_pair(self):
        def metric(a, b):
            raise ValueError("boom")

        with pytest.raises(ValueError, match=r"pair \(a, b\)"):
            pairwise_matrix([1, 2], metric, ids=("a", "b"))

    def test_needs_two_items(self):
        with pytest.raises(ConfigurationError):
            pairwise_matrix([1], lambda a, b: 0.0)


class TestSingleLinkage:
    def test_hand_trace(self):
        dend = single_linkage(HAND_TRACE)
        assert dend.merges == ((0, 1, 1.0), (2, 3, 5.0))

    def test_all_zero_distances(self):
        dend = single_linkage(matrix(np.zeros((4, 4))))
        assert all(h == 0.0 for _, _, h in dend.merges)

    def test_heights_non_decreasing_random(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n = int(rng.integers(3, 12))
            d = rng.uniform(0.1, 5.0, (n, n))
            d = np.triu(d, 1)
            d = d + d.T
            dend = single_linkage(matrix(d))
            heights = [h for _, _, h in dend.merges]
            assert heights == sorted(heights)

    def test_tie_break_lowest_item_pair(self):
        # all pairs at distance 1: (0,1) must merge first, then 2 joins
        dend = single_linkage(matrix(np.ones((3, 3)) - np.eye(3)))
        assert dend.merges[0][:2] == (0, 1)


class TestCut:
    def test_height_cut_hand_trace(self):
        labels = cut(single_linkage(HAND_TRACE), height=2.0)
        assert labels.assignment == {"0": 0, "1": 0, "2": 1}

    def test_k_equals_one(self):
        labels = cut(single_linkage(HAND_TRACE), num_clusters=1)
        assert labels.n_clusters == 1

    def test_k_equals_leaf_count(self):
        labels = cut(single_linkage(HAND_TRACE), num_clusters=3)
        assert labels.assignment == {"0": 0, "1": 1, "2": 2}

    def test_invalid_k(self):
        dend = single_linkage(HAND_TRACE)
        for bad in (0, 4, -1):
            with pytest.raises(ConfigurationError):
                cut(dend, num_clusters=bad)

    def test_exactly_one_criterion(self):
        dend = single_linkage(HAND_TRACE)
        with pytest.raises(ConfigurationError):
            cut(dend)
        with pytest.raises(ConfigurationError):
            cut(dend, num_clusters=2, height=1.0)

    def test_cut_k_matches_cut_height_between_merges(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            n = int(rng.integers(4, 10))
            d = rng.uniform(0.5, 4.0, (n, n))
            d = np.triu(d, 1)
            d = d + d.T
            dend = single_linkage(matrix(d))
            heights = [h for _, _, h in dend.merges]
            for k in range(2, n):
                lo, hi = heights[n - k - 1], heights[n - k]
                if lo == hi:
                    continue
                h = 0.5 * (lo + hi)
                assert cut(dend, num_clusters=k).assignment == cut(dend, height=h).assignment

    def test_height_below_min_gives_singletons(self):
        dend = single_linkage(HAND_TRACE)
        labels = cut(dend, height=0.5)
        assert labels.n_clusters == 3

    def test_height_at_max_gives_single_cluster(self):
        dend = single_linkage(HAND_TRACE)
        assert cut(dend, height=5.0).n_clusters == 1


class TestDendrogramType:
    def test_merge_count_enforced(self):
        with pytest.raises(FormatError):
            Dendrogram(("a", "b", "c"), ((0, 1, 1.0),))

    def test_heights_must_not_decrease(self):
        with pytest.raises(FormatError):
            Dendrogram(("a", "b", "c"), ((0, 1, 2.0), (2, 3, 1.0)))

    def test_child_reuse_rejected(self):
        with pytest.raises(FormatError):
            Dendrogram(("a", "b", "c"), ((0, 1, 1.0), (1, 2, 2.0)))


class TestConfusion:
    def test_perfect_match(self):
        truth = ClusterLabels({"a": 0, "b": 0, "c": 1})
        m, acc = confusion(truth, truth)
        assert acc == 1.0
        assert m == pytest.approx(np.diag([2, 1]))

    def test_permutation_invariance(self):
        truth = ClusterLabels({"a": 0, "b": 0, "c": 1, "d": 2})
        permuted = ClusterLabels({"a": 2, "b": 2, "c": 0, "d": 1})
        _, acc = confusion(permuted, truth)
        assert acc == 1.0

    def test_extra_predicted_clusters(self):
        truth = ClusterLabels({"a": 0, "b": 0, "c": 0, "d": 1})
        pred = ClusterLabels({"a": 0, "b": 0, "c": 1, "d": 2})
        m, acc = confusion(pred, truth)
        assert m.shape == (2, 3)
        assert acc == pytest.approx(3 / 4)

    def test_item_set_mismatch(self):
        with pytest.raises(ConfigurationError):
            confusion(ClusterLabels({"a": 0}), ClusterLabels({"b": 0}))

    def test_random_relabeling_invariance(self):
        rng = np.random.default_rng(10)
        items = [f"i{j}" for j in range(20)]
        truth = ClusterLabels({i: int(rng.integers(0, 3)) for i in items})
        pred_raw = {i: int(rng.integers(0, 4)) for i in items}
        pred = ClusterLabels(pred_raw)
        _, acc = confusion(pred, truth)
        perm = rng.permutation(4)
        relabeled = ClusterLabels({i: int(perm[v]) for i, v in pred_raw.items()})
        _, acc2 = confusion(relabeled, truth)
        assert acc == acc2


class TestClusterLabels:
    def test_contiguous_indices_enforced(self):
        with pytest.raises(FormatError):
            ClusterLabels({"a": 0, "b": 2})

    def test_as_array_order(self):
        labels = ClusterLabels({"a": 0, "b": 1})
        assert labels.as_array(["b", "a"]).tolist() == [1, 0]
