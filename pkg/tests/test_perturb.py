import numpy as np
import pytest

from explagg.core import CATEGORICAL, NUMERIC, FeatureSchema
from explagg.ingest import Dataset
from explagg.perturb import (AutoencoderModel, NoiseConfig, TrainingError,
                             latent_neighbors, perturb_dataset,
                             train_autoencoder)

from conftest import numeric_dataset


def line_dataset(n=200, seed=0):
    rng = np.random.default_rng(seed)
    t = rng.normal(size=n)
    direction = np.array([1.0, -0.5, 2.0, 0.3, -1.2])
    x = np.outer(t, direction)
    x = (x - x.mean(0)) / x.std(0)
    return numeric_dataset(x)


class TestTraining:
    def test_constant_data_reconstructed(self):
        rng = np.random.default_rng(0)
        point = rng.normal(size=5)
        data = numeric_dataset(np.tile(point, (200, 1)))
        ae = train_autoencoder(data, q=1, epochs=2000, seed=1)
        assert ae.loss_trace[-1] < 1e-3 * ae.loss_trace[0]

    def test_line_fixture_beats_tenth_of_initial(self):
        # oracle: rank-1 PCA reconstructs a 1-D line exactly, so a width-1
        # latent code has no information obstacle
        data = line_dataset()
        u, s, vt = np.linalg.svd(data.matrix, full_matrices=False)
        pca_loss = float(((data.matrix - (u[:, :1] * s[:1]) @ vt[:1]) ** 2).sum()
                         / data.n_rows)
        assert pca_loss < 1e-12
        ae = train_autoencoder(data, q=1, epochs=500, seed=0)
        assert ae.loss_trace[-1] < 0.1 * ae.loss_trace[0]

    def test_determinism_bitwise(self):
        data = line_dataset()
        a = train_autoencoder(data, q=2, epochs=60, seed=9)
        b = train_autoencoder(data, q=2, epochs=60, seed=9)
        assert np.array_equal(a.loss_trace, b.loss_trace)
        for name in ("w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_loss_trace_contract(self):
        data = line_dataset()
        ae = train_autoencoder(data, q=1, epochs=120, seed=3)
        assert ae.loss_trace.size == 120
        assert np.all(np.isfinite(ae.loss_trace))
        assert ae.loss_trace[-1] <= ae.loss_trace[0]

    def test_q_at_least_d_rejected(self):
        data = line_dataset()
        with pytest.raises(ValueError):
            train_autoencoder(data, q=5, epochs=10, seed=0)
        with pytest.raises(ValueError):
            train_autoencoder(data, q=7, epochs=10, seed=0)

    def test_divergence_reported_with_epoch(self):
        data = line_dataset(n=50)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(TrainingError, match="epoch"):
                train_autoencoder(data, q=1, epochs=200, seed=0, learning_rate=1e300)

    def test_persistence_roundtrip(self, tmp_path):
        data = line_dataset(n=80)
        ae = train_autoencoder(data, q=2, epochs=40, seed=5)
        path = tmp_path / "ae.json"
        ae.save(path)
        back = AutoencoderModel.load(path)
        assert back.q == 2
        assert back.schema_hash == ae.schema_hash
        probe = data.matrix[:7]
        assert back.reconstruct(probe) == pytest.approx(ae.reconstruct(probe))


class TestLatentNeighbors:
    def test_self_exclusion(self):
        data = line_dataset(n=30)
        ae = train_autoencoder(data, q=1, epochs=150, seed=0)
        out = latent_neighbors(ae, data, data.matrix[7], k=1)
        assert out.shape == (1,)
        assert out[0] != 7

    def test_tie_break_by_lower_index(self):
        # constant data collapses every latent code: order must be by index
        data = numeric_dataset(np.ones((12, 4)))
        ae = train_autoencoder(data, q=1, epochs=30, seed=0)
        out = latent_neighbors(ae, data, data.matrix[0], k=3)
        # row 0 is the excluded self-match; ties then resolve upward
        assert out.tolist() == [1, 2, 3]

    def test_two_cluster_neighbors_stay_in_cluster(self):
        rng = np.random.default_rng(4)
        a = rng.normal(0, 0.3, size=(40, 4)) + np.array([4.0, 4.0, 4.0, 4.0])
        b = rng.normal(0, 0.3, size=(40, 4)) - np.array([4.0, 4.0, 4.0, 4.0])
        x = np.vstack([a, b])
        x = (x - x.mean(0)) / x.std(0)
        data = numeric_dataset(x)
        ae = train_autoencoder(data, q=2, epochs=400, seed=2)
        for probe in (0, 77):
            out = latent_neighbors(ae, data, data.matrix[probe], k=5)
            # oracle: brute-force scan in the input space of the same data
            dists = np.linalg.norm(data.matrix - data.matrix[probe], axis=1)
            dists[probe] = np.inf
            oracle_cluster = set((np.argsort(dists)[:5] < 40).tolist())
            got_cluster = set((out < 40).tolist())
            assert got_cluster == oracle_cluster

    def test_k_out_of_range_rejected(self):
        data = line_dataset(n=10)
        ae = train_autoencoder(data, q=1, epochs=20, seed=0)
        with pytest.raises(ValueError):
            latent_neighbors(ae, data, data.matrix[0], k=10)
        with pytest.raises(ValueError):
            latent_neighbors(ae, data, data.matrix[0], k=0)


def mixed_dataset(n=40, seed=0):
    rng = np.random.default_rng(seed)
    numeric = rng.normal(size=(n, 3))
    cats = rng.choice([0.0, 1.0, 2.0], size=(n, 2))
    schema = FeatureSchema(("n1", "n2", "n3", "c1", "c2"),
                           (NUMERIC, NUMERIC, NUMERIC, CATEGORICAL, CATEGORICAL))
    return Dataset(np.column_stack([numeric, cats]), schema)


class TestPerturbDataset:
    def test_m_bounds_enforced(self):
        data = mixed_dataset()
        ae = train_autoencoder(data, q=2, epochs=30, seed=0)
        with pytest.raises(ValueError):
            perturb_dataset(data, ae, NoiseConfig(k_neighbors=3, m_features=0))
        with pytest.raises(ValueError):
            perturb_dataset(data, ae, NoiseConfig(k_neighbors=3, m_features=6))

    def test_m_equal_d_copies_a_neighbor_row(self):
        data = mixed_dataset()
        ae = train_autoencoder(data, q=2, epochs=30, seed=0)
        out = perturb_dataset(data, ae, NoiseConfig(k_neighbors=3, m_features=5, seed=1))
        for i in range(data.n_rows):
            matches = (data.matrix == out.matrix[i]).all(axis=1)
            assert matches.any()  # the row is exactly some dataset row

    def test_duplicated_rows_noop(self):
        row = np.array([1.0, -2.0, 0.5, 1.0])
        data = numeric_dataset(np.tile(row, (20, 1)))
        ae = train_autoencoder(data, q=1, epochs=30, seed=0)
        out = perturb_dataset(data, ae, NoiseConfig(k_neighbors=4, m_features=2, seed=3))
        assert np.array_equal(out.matrix, data.matrix)

    def test_hamming_distance_is_m_when_all_values_distinct(self):
        rng = np.random.default_rng(9)
        # all-distinct cells so every donor value differs from the original
        data = numeric_dataset(rng.permutation(30 * 6).reshape(30, 6).astype(float))
        ae = train_autoencoder(data, q=2, epochs=50, seed=0)
        m = 2
        out = perturb_dataset(data, ae, NoiseConfig(k_neighbors=3, m_features=m, seed=5))
        changed = (out.matrix != data.matrix).sum(axis=1)
        assert np.all(changed == m)

    def test_at_most_m_cells_change(self):
        data = mixed_dataset(seed=2)
        ae = train_autoencoder(data, q=2, epochs=40, seed=0)
        m = 3
        out = perturb_dataset(data, ae, NoiseConfig(k_neighbors=4, m_features=m, seed=6))
        changed = (out.matrix != data.matrix).sum(axis=1)
        assert np.all(changed <= m)

    def test_categorical_cells_stay_in_distribution(self):
        data = mixed_dataset(seed=3)
        ae = train_autoencoder(data, q=2, epochs=40, seed=0)
        out = perturb_dataset(data, ae,
                              NoiseConfig(k_neighbors=4, m_features=4, seed=7))
        for j, kind in enumerate(data.schema.kinds):
            if kind == CATEGORICAL:
                allowed = set(np.unique(data.matrix[:, j]).tolist())
                assert set(np.unique(out.matrix[:, j]).tolist()) <= allowed

    def test_byte_reproducibility(self):
        data = mixed_dataset(seed=4)
        ae = train_autoencoder(data, q=2, epochs=40, seed=0)
        cfg = NoiseConfig(k_neighbors=3, m_features=2, seed=11)
        a = perturb_dataset(data, ae, cfg)
        b = perturb_dataset(data, ae, cfg)
        assert a.matrix.tobytes() == b.matrix.tobytes()

    def test_k_bounds_enforced(self):
        data = mixed_dataset()
        ae = train_autoencoder(data, q=2, epochs=30, seed=0)
        with pytest.raises(ValueError):
            perturb_dataset(data, ae, NoiseConfig(k_neighbors=40, m_features=1))
