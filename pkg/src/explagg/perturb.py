"""Autoencoder training and latent-space nearest-neighbor feature-swap noise.

The noisy variant of a training set is built by encoding every row, finding
each row's K nearest neighbors in the latent space, and overwriting a fixed
number of feature positions with the corresponding values from one randomly
chosen neighbor. Swapped categorical cells therefore always hold values that
occur in the data.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .ingest import Dataset

MODEL_FORMAT_VERSION = 1


class TrainingError(Exception):
    """Raised when autoencoder training diverges."""


@dataclass
class AutoencoderModel:
    """Single-hidden-layer tanh encoder/decoder with linear outputs."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    w4: np.ndarray
    b4: np.ndarray
    q: int
    loss_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    schema_hash: str = ""

    @property
    def d(self) -> int:
        return self.w1.shape[0]

    def encode(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.tanh(x @ self.w1 + self.b1) @ self.w2 + self.b2

    def decode(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return np.tanh(z @ self.w3 + self.b3) @ self.w4 + self.b4

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        return self.decode(self.encode(x))

    def save(self, path) -> None:
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": "autoencoder",
            "q": self.q,
            "schema_hash": self.schema_hash,
            "layer_shapes": [list(self.w1.shape), list(self.w2.shape),
                             list(self.w3.shape), list(self.w4.shape)],
            "weights": {name: getattr(self, name).tolist()
                        for name in ("w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4")},
            "loss_trace": self.loss_trace.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path) -> "AutoencoderModel":
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError("unsupported model format version")
        w = {k: np.asarray(v, dtype=float) for k, v in payload["weights"].items()}
        return cls(**w, q=int(payload["q"]),
                   loss_trace=np.asarray(payload["loss_trace"], dtype=float),
                   schema_hash=payload.get("schema_hash", ""))


@dataclass(frozen=True)
class NoiseConfig:
    """Neighbor count K, features replaced per row, and the noise seed."""

    k_neighbors: int = 5
    m_features: int | None = None  # default ceil(d/4), resolved against the data
    seed: int = 0

    def resolve_m(self, d: int) -> int:
        m = self.m_features if self.m_features is not None else int(np.ceil(d / 4))
        if not 1 <= m <= d:
            raise ValueError(f"m_features must lie in [1, {d}], got {m}")
        return m


def schema_fingerprint(schema) -> str:
    blob = json.dumps({"names": list(schema.names), "kinds": list(schema.kinds)},
                      separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _init_layer(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    scale = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-scale, scale, size=(fan_in, fan_out))


def train_autoencoder(data: Dataset, q: int | None = None, epochs: int = 500,
                      seed: int = 0, learning_rate: float = 1e-3) -> AutoencoderModel:
    """Train a reconstruction autoencoder by full-batch adaptive-moment descent.

    The objective is the mean over rows of the squared reconstruction error
    ||x - x_hat||^2. ``q`` defaults to ceil(d/2). The loss trace records the
    objective at the start of each epoch, so the first entry is the initial
    loss and training must not end worse than it started.
    """
    x = np.asarray(data.matrix, dtype=float)
    n, d = x.shape
    if q is None:
        q = max(1, int(np.ceil(d / 2)))
    if q >= d:
        raise ValueError(f"latent width q={q} must be smaller than d={d}")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")

    rng = np.random.default_rng(seed)
    hidden = int(np.ceil((d + q) / 2))
    params = {
        "w1": _init_layer(rng, d, hidden), "b1": np.zeros(hidden),
        "w2": _init_layer(rng, hidden, q), "b2": np.zeros(q),
        "w3": _init_layer(rng, q, hidden), "b3": np.zeros(hidden),
        "w4": _init_layer(rng, hidden, d), "b4": np.zeros(d),
    }
    m_state = {k: np.zeros_like(v) for k, v in params.items()}
    v_state = {k: np.zeros_like(v) for k, v in params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    trace = np.empty(epochs)
    for epoch in range(epochs):
        h1 = np.tanh(x @ params["w1"] + params["b1"])
        z = h1 @ params["w2"] + params["b2"]
        h2 = np.tanh(z @ params["w3"] + params["b3"])
        xhat = h2 @ params["w4"] + params["b4"]

        err = xhat - x
        loss = float((err ** 2).sum() / n)
        if not np.isfinite(loss):
            raise TrainingError(f"loss diverged at epoch {epoch}")
        trace[epoch] = loss

        g_out = 2.0 * err / n
        grads = {
            "w4": h2.T @ g_out,
            "b4": g_out.sum(axis=0),
        }
        g_h2 = (g_out @ params["w4"].T) * (1 - h2 ** 2)
        grads["w3"] = z.T @ g_h2
        grads["b3"] = g_h2.sum(axis=0)
        g_z = g_h2 @ params["w3"].T
        grads["w2"] = h1.T @ g_z
        grads["b2"] = g_z.sum(axis=0)
        g_h1 = (g_z @ params["w2"].T) * (1 - h1 ** 2)
        grads["w1"] = x.T @ g_h1
        grads["b1"] = g_h1.sum(axis=0)

        t = epoch + 1
        for k in params:
            m_state[k] = beta1 * m_state[k] + (1 - beta1) * grads[k]
            v_state[k] = beta2 * v_state[k] + (1 - beta2) * grads[k] ** 2
            m_hat = m_state[k] / (1 - beta1 ** t)
            v_hat = v_state[k] / (1 - beta2 ** t)
            params[k] = params[k] - learning_rate * m_hat / (np.sqrt(v_hat) + eps)

    return AutoencoderModel(**params, q=q, loss_trace=trace,
                            schema_hash=schema_fingerprint(data.schema))


def latent_neighbors(ae: AutoencoderModel, data: Dataset, x, k: int) -> np.ndarray:
    """Indices of the K rows closest to x in the latent space.

    The first row exactly equal to x (if any) is excluded as the query's own
    row; remaining distance ties resolve toward the lower row index.
    """
    if not 1 <= k < data.n_rows:
        raise ValueError(f"k must lie in [1, {data.n_rows - 1}], got {k}")
    x = np.asarray(x, dtype=float)
    z_rows = ae.encode(data.matrix)
    z_x = ae.encode(x)[0]
    dists = np.sqrt(((z_rows - z_x) ** 2).sum(axis=1))

    exact = np.flatnonzero((data.matrix == x).all(axis=1))
    if exact.size:
        dists[exact[0]] = np.inf
    order = np.lexsort((np.arange(dists.size), dists))
    return order[:k]


def perturb_dataset(data: Dataset, ae: AutoencoderModel, cfg: NoiseConfig) -> Dataset:
    """Swap m feature values per row with those of a random latent neighbor.

    Feature positions are re-drawn per row; all m swapped values come from a
    single donor row so the replacement stays jointly realistic. Fully
    deterministic for a fixed config seed.
    """
    if not 1 <= cfg.k_neighbors < data.n_rows:
        raise ValueError(f"k_neighbors must lie in [1, {data.n_rows - 1}]")
    m = cfg.resolve_m(data.d)
    rng = np.random.default_rng(cfg.seed)

    z_rows = ae.encode(data.matrix)
    out = data.matrix.copy()
    for i in range(data.n_rows):
        dists = np.sqrt(((z_rows - z_rows[i]) ** 2).sum(axis=1))
        exact = np.flatnonzero((data.matrix == data.matrix[i]).all(axis=1))
        dists[exact[0] if exact.size else i] = np.inf
        order = np.lexsort((np.arange(dists.size), dists))
        neighbors = order[:cfg.k_neighbors]
        donor = neighbors[rng.integers(cfg.k_neighbors)]
        positions = rng.choice(data.d, size=m, replace=False)
        out[i, positions] = data.matrix[donor, positions]

    labels = None if data.labels is None else data.labels.copy()
    return Dataset(out, data.schema, labels, dict(data.manifest))
