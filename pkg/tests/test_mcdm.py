import numpy as np
import pytest

from explagg.core import Weights
from explagg.mcdm import (BENEFIT, COST, DecisionMatrix, McdmResult, edas,
                          scores_to_weights, topsis)


def dm(values, directions=None, weights=None):
    values = np.asarray(values, dtype=float)
    m, n = values.shape
    directions = tuple(directions if directions is not None else (BENEFIT,) * n)
    if weights is None:
        weights = [1.0 / n] * n
    weights = Weights(tuple(float(w) for w in weights))
    return DecisionMatrix(values, directions, weights)


# ---------------------------------------------------------------------------
# independent step-by-step transcriptions used as oracles
# ---------------------------------------------------------------------------

def topsis_transcription(values, directions, weights):
    values = [row[:] for row in values]
    m, n = len(values), len(values[0])
    # nonnegativity shift convention shared with the implementation
    for j in range(n):
        col_min = min(values[i][j] for i in range(m))
        if col_min < 0:
            for i in range(m):
                values[i][j] = values[i][j] - col_min + 1e-9
    r = [[0.0] * n for _ in range(m)]
    for j in range(n):
        norm = sum(values[i][j] ** 2 for i in range(m)) ** 0.5
        if norm == 0:
            continue
        for i in range(m):
            r[i][j] = values[i][j] / norm
    v = [[weights[j] * r[i][j] for j in range(n)] for i in range(m)]
    pis, nis = [], []
    for j in range(n):
        col = [v[i][j] for i in range(m)]
        if directions[j] == BENEFIT:
            pis.append(max(col))
            nis.append(min(col))
        else:
            pis.append(min(col))
            nis.append(max(col))
    scores = []
    for i in range(m):
        sp = sum((v[i][j] - pis[j]) ** 2 for j in range(n)) ** 0.5
        sn = sum((v[i][j] - nis[j]) ** 2 for j in range(n)) ** 0.5
        scores.append(0.5 if sp + sn == 0 else sn / (sp + sn))
    return scores


def edas_transcription(values, directions, weights):
    m, n = len(values), len(values[0])
    avg = [sum(values[i][j] for i in range(m)) / m for j in range(n)]
    sp = [0.0] * m
    sn = [0.0] * m
    for i in range(m):
        for j in range(n):
            if directions[j] == BENEFIT:
                pda = max(0.0, values[i][j] - avg[j])
                nda = max(0.0, avg[j] - values[i][j])
            else:
                pda = max(0.0, avg[j] - values[i][j])
                nda = max(0.0, values[i][j] - avg[j])
            sp[i] += weights[j] * pda
            sn[i] += weights[j] * nda
    max_sp, max_sn = max(sp), max(sn)
    nsp = [0.0 if max_sp == 0 else s / max_sp for s in sp]
    nsn = [1.0 if max_sn == 0 else 1.0 - s / max_sn for s in sn]
    return [(a + b) / 2.0 for a, b in zip(nsp, nsn)]


MATRIX_3X3 = [[7.0, 9.0, 9.0], [8.0, 7.0, 8.0], [9.0, 6.0, 8.0]]


class TestTopsis:
    def test_single_benefit_extremes(self):
        res = topsis(dm([[1.0], [3.0]]))
        assert res.scores == pytest.approx([0.0, 1.0])

    def test_identical_rows_convention(self):
        res = topsis(dm([[2.0, 3.0], [2.0, 3.0], [2.0, 3.0]]))
        assert res.scores == pytest.approx([0.5, 0.5, 0.5])
        assert any("identical" in f for f in res.flags)

    def test_hand_matrix_against_transcription(self):
        res = topsis(dm(MATRIX_3X3))
        expected = topsis_transcription(MATRIX_3X3, (BENEFIT,) * 3, [1 / 3] * 3)
        assert res.scores == pytest.approx(expected, abs=1e-9)

    def test_all_zero_column_skipped(self):
        res = topsis(dm([[0.0, 1.0], [0.0, 2.0]]))
        assert any("all zero" in f for f in res.flags)
        assert res.scores == pytest.approx([0.0, 1.0])

    def test_negative_values_shifted(self):
        res = topsis(dm([[-1.0, 2.0], [1.0, 4.0]]))
        assert any("min-shifted" in f for f in res.flags)
        assert res.scores[1] > res.scores[0]

    def test_column_scaling_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            m, n = int(rng.integers(2, 6)), int(rng.integers(1, 5))
            values = rng.uniform(0.1, 10, size=(m, n))
            dirs = tuple(rng.choice([BENEFIT, COST], size=n))
            w = rng.uniform(0.1, 1, size=n)
            w = w / w.sum()
            scale = rng.uniform(0.5, 20, size=n)
            a = topsis(dm(values, dirs, w)).scores
            b = topsis(dm(values * scale, dirs, w)).scores
            assert a == pytest.approx(b, abs=1e-9)

    def test_reorder_equivariance(self):
        rng = np.random.default_rng(1)
        values = rng.uniform(0, 5, size=(5, 3))
        perm = rng.permutation(5)
        a = topsis(dm(values)).scores
        b = topsis(dm(values[perm])).scores
        assert b == pytest.approx(a[perm])


class TestEdas:
    def test_identical_rows_convention(self):
        res = edas(dm([[1.0, 2.0], [1.0, 2.0]]))
        assert res.scores == pytest.approx([0.5, 0.5])

    def test_two_alternative_extremes(self):
        res = edas(dm([[5.0, 5.0], [1.0, 1.0]]))
        assert res.scores == pytest.approx([1.0, 0.0])

    def test_hand_matrix_against_transcription(self):
        res = edas(dm(MATRIX_3X3))
        expected = edas_transcription(MATRIX_3X3, (BENEFIT,) * 3, [1 / 3] * 3)
        assert res.scores == pytest.approx(expected, abs=1e-9)

    def test_mixed_directions_against_transcription(self):
        values = [[3.0, 10.0, 2.0], [4.0, 8.0, 5.0], [5.0, 6.0, 1.0], [2.0, 12.0, 4.0]]
        dirs = (BENEFIT, COST, COST)
        w = [0.5, 0.3, 0.2]
        res = edas(dm(values, dirs, w))
        assert res.scores == pytest.approx(
            edas_transcription(values, dirs, w), abs=1e-9)

    def test_reorder_equivariance(self):
        rng = np.random.default_rng(2)
        values = rng.uniform(0, 5, size=(6, 4))
        perm = rng.permutation(6)
        a = edas(dm(values)).scores
        b = edas(dm(values[perm])).scores
        assert b == pytest.approx(a[perm])


class TestOracleSweepAndDominance:
    def test_oracle_100_random_matrices(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            m = int(rng.integers(2, 7))
            n = int(rng.integers(1, 6))
            values = rng.uniform(0, 10, size=(m, n))
            dirs = tuple(rng.choice([BENEFIT, COST], size=n))
            w = rng.uniform(0.1, 1, size=n)
            w = (w / w.sum()).tolist()
            t = topsis(dm(values, dirs, w)).scores
            e = edas(dm(values, dirs, w)).scores
            assert t == pytest.approx(
                topsis_transcription(values.tolist(), dirs, w), abs=1e-9)
            assert e == pytest.approx(
                edas_transcription(values.tolist(), dirs, w), abs=1e-9)
            assert np.all((t >= 0) & (t <= 1))
            assert np.all((e >= 0) & (e <= 1))

    def test_dominance_1000_planted_pairs(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            m = int(rng.integers(2, 6))
            n = int(rng.integers(1, 5))
            values = rng.uniform(0, 10, size=(m, n))
            dirs = tuple(rng.choice([BENEFIT, COST], size=n))
            w = rng.uniform(0.1, 1, size=n)
            w = (w / w.sum()).tolist()
            a, b = rng.choice(m, size=2, replace=False)
            # plant: a dominates b with at least one strict improvement
            for j in range(n):
                better = abs(rng.normal(0, 1.0))
                if dirs[j] == BENEFIT:
                    values[a, j] = values[b, j] + better
                else:
                    values[a, j] = max(0.0, values[b, j] - better)
            matrix = dm(values, dirs, w)
            for scorer in (topsis, edas):
                scores = scorer(matrix).scores
                assert scores[a] >= scores[b] - 1e-12, (
                    f"{scorer.__name__} violated dominance")


class TestScoresToWeights:
    def test_already_normalized(self):
        w = scores_to_weights(McdmResult(np.array([0.2, 0.3, 0.5]), "topsis"))
        assert w.as_array() == pytest.approx([0.2, 0.3, 0.5])

    def test_degenerate_zero_scores(self):
        w = scores_to_weights(McdmResult(np.array([0.0, 0.0, 0.0]), "edas"))
        assert w.as_array() == pytest.approx([1 / 3] * 3)

    def test_direct_normalization(self):
        w = scores_to_weights(McdmResult(np.array([0.5, 1.0]), "topsis"))
        assert w.as_array() == pytest.approx([1 / 3, 2 / 3])

    def test_negative_rejected(self):
        res = McdmResult(np.array([0.5, 1.0]), "topsis")
        res.scores = np.array([-0.5, 1.0])  # bypass the constructor check
        with pytest.raises(ValueError):
            scores_to_weights(res)

    def test_sum_is_one(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            scores = rng.uniform(0, 1, size=int(rng.integers(2, 8)))
            assert scores_to_weights(
                McdmResult(scores, "edas")).as_array().sum() == pytest.approx(1.0)


class TestValidation:
    def test_single_alternative_rejected(self):
        with pytest.raises(ValueError):
            dm([[1.0, 2.0]])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            dm([[1.0], [np.nan]])

    def test_direction_count_enforced(self):
        with pytest.raises(ValueError):
            DecisionMatrix(np.ones((2, 2)), (BENEFIT,), Weights((0.5, 0.5)))
