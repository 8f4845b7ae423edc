"""In-distribution noise from latent-space neighbors.

Gaussian noise needs a variance per column and mangles categorical codes.
Instead: train a small reconstruction autoencoder, find each row's nearest
neighbors in the latent space, and copy a few feature values from one
neighbor. Categorical cells can then only ever hold values the data
actually contains.
"""

import numpy as np

from explagg import NoiseConfig, latent_neighbors, perturb_dataset, train_autoencoder
from explagg.core import CATEGORICAL, NUMERIC, FeatureSchema
from explagg.ingest import Dataset

rng = np.random.default_rng(0)
n = 200
numeric = rng.normal(size=(n, 4))
plan = rng.choice([1.0, 2.0, 3.0], size=(n, 1), p=[0.5, 0.3, 0.2])
schema = FeatureSchema(("n1", "n2", "n3", "n4", "plan"),
                       (NUMERIC, NUMERIC, NUMERIC, NUMERIC, CATEGORICAL))
data = Dataset(np.column_stack([numeric, plan]), schema)

ae = train_autoencoder(data, q=2, epochs=400, seed=0)
print(f"reconstruction loss: {ae.loss_trace[0]:.3f} -> {ae.loss_trace[-1]:.3f} "
      f"over {ae.loss_trace.size} epochs")

neighbors = latent_neighbors(ae, data, data.matrix[17], k=4)
print("latent neighbors of row 17:", neighbors)

noisy = perturb_dataset(data, ae, NoiseConfig(k_neighbors=4, m_features=2, seed=1))
changed = (noisy.matrix != data.matrix).sum(axis=1)
print("cells changed per row: min", changed.min(), "max", changed.max())
print("plan column values still in", sorted(set(noisy.matrix[:, 4].tolist())))
