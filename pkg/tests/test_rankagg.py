import numpy as np
import pytest

from explagg.core import FeatureSchema, Ranking, Weights, rank_features, Explanation
from explagg.rankagg import (AggregationInput, borda_aggregate,
                             condorcet_aggregate, wsum_aggregate)

ALL_METHODS = (wsum_aggregate, borda_aggregate, condorcet_aggregate)


def make_input(rank_lists, weights=None):
    d = len(rank_lists[0])
    schema = FeatureSchema.all_numeric([f"x{j}" for j in range(d)])
    rankings = tuple(Ranking(schema, r) for r in rank_lists)
    if weights is None:
        weights = [1.0 / len(rank_lists)] * len(rank_lists)
    return AggregationInput(rankings, Weights(tuple(weights)))


def random_profile(rng, n_components, d):
    """Random component rankings (permutations with occasional ties)."""
    lists = []
    for _ in range(n_components):
        pool = rng.integers(1, d + 2, size=d).astype(float)
        schema = FeatureSchema.all_numeric([f"x{j}" for j in range(d)])
        lists.append(rank_features(Explanation(schema, pool)).ranks.tolist())
    w = rng.uniform(0.05, 1.0, size=n_components)
    return lists, (w / w.sum()).tolist()


class TestWsum:
    def test_unanimity(self):
        agg_in = make_input([[2, 1, 3], [2, 1, 3], [2, 1, 3]])
        assert wsum_aggregate(agg_in).ranks.tolist() == [2, 1, 3]

    def test_dictator_weight(self):
        agg_in = make_input([[1, 2, 3], [3, 2, 1], [2, 1, 3]], [1.0, 0.0, 0.0])
        assert wsum_aggregate(agg_in).ranks.tolist() == [1, 2, 3]

    def test_hand_case(self):
        # 0.7*[1, 0.15625, 0] + 0.3*[0, 0.15625, 1] = [0.7, 0.15625, 0.3]
        agg_in = make_input([[1, 2, 3], [3, 2, 1]], [0.7, 0.3])
        assert wsum_aggregate(agg_in).ranks.tolist() == [1, 3, 2]


class TestBorda:
    def test_unanimity(self):
        agg_in = make_input([[3, 1, 2], [3, 1, 2]])
        assert borda_aggregate(agg_in).ranks.tolist() == [3, 1, 2]

    def test_symmetric_tie(self):
        agg_in = make_input([[1, 2], [2, 1]], [0.5, 0.5])
        assert borda_aggregate(agg_in).ranks.tolist() == [1, 1]

    def test_hand_case(self):
        # B = [0.6*2+0.4*1, 0.6*1+0.4*2, 0] = [1.6, 1.4, 0]
        agg_in = make_input([[1, 2, 3], [2, 1, 3]], [0.6, 0.4])
        assert borda_aggregate(agg_in).ranks.tolist() == [1, 2, 3]


class TestCondorcet:
    def test_unanimity(self):
        agg_in = make_input([[1, 3, 2], [1, 3, 2]])
        assert condorcet_aggregate(agg_in).ranks.tolist() == [1, 3, 2]

    def test_dictator_weight(self):
        agg_in = make_input([[2, 3, 1], [1, 2, 3]], [1.0, 0.0])
        assert condorcet_aggregate(agg_in).ranks.tolist() == [2, 3, 1]

    def test_three_cycle_fully_tied(self):
        # a>b>c, b>c>a, c>a>b: every Copeland score 0, Borda totals equal
        agg_in = make_input([[1, 2, 3], [3, 1, 2], [2, 3, 1]],
                            [1 / 3, 1 / 3, 1 / 3])
        assert condorcet_aggregate(agg_in).ranks.tolist() == [1, 1, 1]

    def test_borda_tiebreak_separates(self):
        # the (a,b) contest nets to zero (one win each, one shared rank) so
        # Copeland ties them at +1, but a's Borda total 5/3 beats b's 4/3
        agg_in = make_input([[1, 3, 2], [2, 1, 3], [1, 1, 3]],
                            [1 / 3, 1 / 3, 1 / 3])
        out = condorcet_aggregate(agg_in).ranks.tolist()
        assert out == [1, 2, 3]

    def test_equal_on_both_keys_share_rank(self):
        # fully symmetric two-component disagreement: pairwise tie and equal
        # Borda totals, so a and b share rank 1
        agg_in = make_input([[1, 2, 3], [2, 1, 3]], [0.5, 0.5])
        assert condorcet_aggregate(agg_in).ranks.tolist() == [1, 1, 3]


class TestSharedProperties:
    def test_unanimity_all_methods(self):
        rng = np.random.default_rng(0)
        for method in ALL_METHODS:
            for _ in range(50):
                lists, _ = random_profile(rng, 1, 6)
                agg_in = make_input(lists * 4, [0.25] * 4)
                assert method(agg_in).ranks.tolist() == lists[0]

    def test_dictatorship_all_methods(self):
        rng = np.random.default_rng(1)
        for method in ALL_METHODS:
            for _ in range(50):
                lists, _ = random_profile(rng, 3, 5)
                weights = [0.0, 1.0, 0.0]
                agg_in = make_input(lists, weights)
                assert method(agg_in).ranks.tolist() == lists[1]

    def test_permutation_equivariance_all_methods(self):
        rng = np.random.default_rng(2)
        d = 6
        for method in ALL_METHODS:
            for _ in range(50):
                lists, weights = random_profile(rng, 3, d)
                perm = rng.permutation(d)
                base = method(make_input(lists, weights)).ranks
                permuted_lists = [list(np.asarray(r)[perm]) for r in lists]
                out = method(make_input(permuted_lists, weights)).ranks
                assert out.tolist() == base[perm].tolist()

    def test_outputs_are_valid_rankings(self):
        rng = np.random.default_rng(3)
        for method in ALL_METHODS:
            for _ in range(100):
                lists, weights = random_profile(rng, int(rng.integers(1, 5)),
                                                int(rng.integers(2, 8)))
                out = method(make_input(lists, weights))
                assert isinstance(out, Ranking)  # constructor validates shape

    def test_condorcet_winner_gets_rank_one(self):
        rng = np.random.default_rng(4)
        hits = 0
        for _ in range(1000):
            d = int(rng.integers(2, 7))
            lists, weights = random_profile(rng, int(rng.integers(2, 5)), d)
            ranks = np.asarray(lists, dtype=float)
            w = np.asarray(weights)
            winner = None
            for a in range(d):
                beats_all = all(
                    float(np.sum(w * np.sign(ranks[:, b] - ranks[:, a]))) > 0
                    for b in range(d) if b != a)
                if beats_all:
                    winner = a
                    break
            if winner is None:
                continue
            hits += 1
            out = condorcet_aggregate(make_input(lists, weights))
            assert out.ranks[winner] == 1
        assert hits > 200  # the property was actually exercised


class TestValidation:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            AggregationInput((), Weights((1.0,)))

    def test_weight_count_enforced(self):
        schema = FeatureSchema.all_numeric(["a", "b"])
        r = Ranking(schema, [1, 2])
        with pytest.raises(ValueError):
            AggregationInput((r,), Weights((0.5, 0.5)))

    def test_schema_mismatch_rejected(self):
        r1 = Ranking(FeatureSchema.all_numeric(["a", "b"]), [1, 2])
        r2 = Ranking(FeatureSchema.all_numeric(["p", "q"]), [1, 2])
        with pytest.raises(ValueError):
            AggregationInput((r1, r2), Weights((0.5, 0.5)))
