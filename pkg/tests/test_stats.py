import numpy as np
import pytest

from explagg.stats import (average_ranks, count_significantly_worse,
                           finner_posthoc, friedman_test, pearson, spearman)


class TestCorrelations:
    def test_identity(self):
        xs = [1.0, 2.0, 5.0, 3.0]
        assert pearson(xs, xs) == pytest.approx(1.0)
        assert spearman(xs, xs) == pytest.approx(1.0)

    def test_negation(self):
        xs = np.array([1.0, 2.0, 5.0, 3.0])
        assert pearson(xs, -xs) == pytest.approx(-1.0)
        assert spearman(xs, -xs) == pytest.approx(-1.0)

    def test_spearman_hand_case(self):
        # rank differences (1,1,1,1,0): 1 - 6*4/(5*24) = 0.8
        assert spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(0.8)

    def test_constant_convention(self):
        assert pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) == 0.0
        assert spearman([1.0, 2.0, 3.0], [4.0, 4.0, 4.0]) == 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            spearman([1.0], [1.0])

    def test_spearman_equals_pearson_on_avg_ranks(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(3, 20))
            xs = rng.integers(0, 5, size=n).astype(float)  # plenty of ties
            ys = rng.integers(0, 5, size=n).astype(float)
            assert spearman(xs, ys) == pytest.approx(
                pearson(average_ranks(xs), average_ranks(ys)))


class TestAverageRanks:
    def test_plain(self):
        assert average_ranks([3.0, 1.0, 2.0]).tolist() == [3.0, 1.0, 2.0]

    def test_ties_averaged(self):
        assert average_ranks([1.0, 1.0, 2.0]).tolist() == [1.5, 1.5, 3.0]


def friedman_transcription(table):
    """Independent transcription of the rank-test statistic."""
    table = np.asarray(table, dtype=float)
    n, k = table.shape
    rbar = np.zeros(k)
    for row in table:
        order = sorted(row)
        ranks = []
        for v in row:
            positions = [i for i, o in enumerate(order) if o == v]
            ranks.append(1 + sum(positions) / len(positions))
        rbar += np.asarray(ranks)
    rbar /= n
    return 12.0 * n / (k * (k + 1)) * (float((rbar ** 2).sum()) - k * (k + 1) ** 2 / 4.0)


class TestFriedman:
    def test_all_tied(self):
        table = np.ones((5, 3))
        res = friedman_test(table)
        assert res.chi_square == pytest.approx(0.0)
        assert res.p_value == pytest.approx(1.0)

    def test_strict_winner_k3_n10(self):
        # method 0 best, 1 middle, 2 worst in every block: chi^2 = 20
        table = np.tile(np.array([1.0, 2.0, 3.0]), (10, 1))
        res = friedman_test(table)
        assert res.chi_square == pytest.approx(20.0, abs=1e-9)
        assert res.p_value < 0.05

    def test_worked_example_matches_transcription(self):
        rng = np.random.default_rng(1)
        table = rng.normal(size=(7, 4))
        res = friedman_test(table)
        assert res.chi_square == pytest.approx(friedman_transcription(table), abs=1e-9)

    def test_average_ranks_sum_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n, k = int(rng.integers(2, 10)), int(rng.integers(2, 6))
            table = rng.integers(0, 4, size=(n, k)).astype(float)
            res = friedman_test(table)
            assert res.average_ranks.sum() == pytest.approx(k * (k + 1) / 2)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            friedman_test(np.ones((1, 3)))
        with pytest.raises(ValueError):
            friedman_test(np.ones((3, 1)))


class TestFinner:
    def test_single_comparison_is_raw(self):
        assert finner_posthoc([0.37]).tolist() == pytest.approx([0.37])

    def test_all_zero(self):
        assert finner_posthoc([0.0, 0.0, 0.0]).tolist() == [0.0, 0.0, 0.0]

    def test_hand_case(self):
        adjusted = finner_posthoc([0.01, 0.04, 0.20])
        # 1-(0.99)^3, 1-(0.96)^(3/2), 1-(0.80)^1
        assert adjusted == pytest.approx([0.029701, 0.0593959, 0.2], abs=1e-6)

    def test_hand_case_exact_transcription(self):
        p = [0.01, 0.04, 0.20]
        expected = []
        running = 0.0
        for j, pj in enumerate(sorted(p), start=1):
            running = max(running, 1.0 - (1.0 - pj) ** (len(p) / j))
            expected.append(running)
        assert finner_posthoc(p) == pytest.approx(expected, abs=1e-9)

    def test_adjusted_at_least_raw_and_monotone(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = rng.uniform(0, 1, size=int(rng.integers(1, 8)))
            adj = finner_posthoc(p)
            assert np.all(adj >= p - 1e-12)
            order = np.argsort(p, kind="mergesort")
            assert np.all(np.diff(adj[order]) >= -1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            finner_posthoc([0.5, 1.2])

    def test_positions_preserved(self):
        p = [0.2, 0.01]
        adj = finner_posthoc(p)
        assert adj[1] < adj[0]


class TestSignificanceCounts:
    def test_gated_to_zero_without_friedman(self):
        rng = np.random.default_rng(4)
        table = rng.normal(size=(3, 3))  # tiny n: Friedman cannot reject
        res = friedman_test(table)
        if res.p_value >= 0.05:
            assert count_significantly_worse(table, 0) == 0

    def test_identical_methods_count_zero(self):
        table = np.ones((10, 4))
        assert count_significantly_worse(table, 0) == 0

    def test_dominant_method_counts_all_others(self):
        # method 0 strictly best in 30 blocks of 3 methods
        table = np.tile(np.array([1.0, 2.0, 3.0]), (30, 1))
        assert count_significantly_worse(table, 0) == 2

    def test_worst_method_counts_zero(self):
        table = np.tile(np.array([1.0, 2.0, 3.0]), (30, 1))
        assert count_significantly_worse(table, 2) == 0
