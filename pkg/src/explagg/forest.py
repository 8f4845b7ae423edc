"""Reference black-box predictor: a small random forest built from scratch.

Depth-limited binary trees with axis-aligned Gini splits, bagged rows, and
per-node feature subsampling. The predicted positive-class probability is
the mean of the per-tree leaf estimates. Everything is deterministic for a
fixed seed, which the rest of the pipeline relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import FeatureSchema
from .ingest import Dataset


@dataclass
class DecisionTree:
    """Flattened tree arrays; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # positive-class probability at each node

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        idx = np.zeros(x.shape[0], dtype=int)
        while True:
            internal = self.feature[idx] >= 0
            if not internal.any():
                break
            rows = np.flatnonzero(internal)
            node = idx[rows]
            go_left = x[rows, self.feature[node]] <= self.threshold[node]
            idx[rows] = np.where(go_left, self.left[node], self.right[node])
        return self.value[idx]


def _gini_split(values: np.ndarray, y: np.ndarray) -> tuple[float, float] | None:
    """Best (weighted impurity, threshold) for one feature, or None if unsplittable."""
    order = np.argsort(values, kind="mergesort")
    v = values[order]
    ys = y[order]
    n = v.size
    ones = np.cumsum(ys)
    total_ones = ones[-1]
    # split after position i (1-based count i+1 on the left)
    boundary = np.flatnonzero(v[1:] > v[:-1])
    if boundary.size == 0:
        return None
    n_left = boundary + 1.0
    n_right = n - n_left
    ones_left = ones[boundary].astype(float)
    ones_right = total_ones - ones_left
    p_left = ones_left / n_left
    p_right = ones_right / n_right
    impurity = (n_left * 2 * p_left * (1 - p_left)
                + n_right * 2 * p_right * (1 - p_right)) / n
    best = int(np.argmin(impurity))
    cut = boundary[best]
    threshold = (v[cut] + v[cut + 1]) / 2.0
    return float(impurity[best]), threshold


def _build_tree(x: np.ndarray, y: np.ndarray, max_depth: int,
                max_features: int, rng: np.random.Generator) -> DecisionTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node(p: float) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(p)
        return len(feature) - 1

    def grow(rows: np.ndarray, depth: int) -> int:
        ysub = y[rows]
        p = float(ysub.mean())
        node = new_node(p)
        if depth >= max_depth or rows.size < 2 or p in (0.0, 1.0):
            return node
        candidates = rng.choice(x.shape[1], size=max_features, replace=False)
        best = None
        for f in candidates:
            found = _gini_split(x[rows, f], ysub)
            if found is None:
                continue
            impurity, thr = found
            if best is None or impurity < best[0]:
                best = (impurity, int(f), thr)
        if best is None:
            return node
        _, f, thr = best
        mask = x[rows, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left[node] = grow(rows[mask], depth + 1)
        right[node] = grow(rows[~mask], depth + 1)
        return node

    grow(np.arange(x.shape[0]), 0)
    return DecisionTree(np.asarray(feature), np.asarray(threshold),
                        np.asarray(left), np.asarray(right), np.asarray(value))


@dataclass
class ForestModel:
    """Bagged Gini trees; prediction is the mean of per-tree outputs."""

    trees: list[DecisionTree]
    n_trees: int
    max_depth: int
    seed: int
    schema: FeatureSchema | None = None
    diagnostics: dict = field(default_factory=dict)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        for tree in self.trees:
            out += tree.predict_proba(x)
        return out / len(self.trees)

    def to_json_dict(self) -> dict:
        return {
            "kind": "forest",
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "seed": self.seed,
            "schema": None if self.schema is None else
                      {"names": list(self.schema.names), "kinds": list(self.schema.kinds)},
            "trees": [{
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "value": t.value.tolist(),
            } for t in self.trees],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ForestModel":
        trees = [DecisionTree(np.asarray(t["feature"], int),
                              np.asarray(t["threshold"], float),
                              np.asarray(t["left"], int),
                              np.asarray(t["right"], int),
                              np.asarray(t["value"], float))
                 for t in obj["trees"]]
        schema = None
        if obj.get("schema"):
            schema = FeatureSchema(tuple(obj["schema"]["names"]),
                                   tuple(obj["schema"]["kinds"]))
        return cls(trees, obj["n_trees"], obj["max_depth"], obj["seed"], schema)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path) -> "ForestModel":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def train_forest(train: Dataset, labels=None, n_trees: int = 50,
                 max_depth: int = 8, seed: int = 0) -> ForestModel:
    """Fit a forest on a Dataset; labels default to the dataset's own."""
    x = train.matrix
    y = np.asarray(train.labels if labels is None else labels, dtype=int)
    if x.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    if np.unique(y).size < 2:
        raise ValueError("training labels contain a single class")
    if set(np.unique(y)) - {0, 1}:
        raise ValueError("labels must be binary 0/1")

    d = x.shape[1]
    max_features = max(1, int(np.ceil(np.sqrt(d))))
    seeds = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        rows = rng.integers(0, x.shape[0], size=x.shape[0])
        trees.append(_build_tree(x[rows], y[rows], max_depth, max_features, rng))
    model = ForestModel(trees, n_trees, max_depth, seed, train.schema)
    preds = (model.predict_proba(x) >= 0.5).astype(int)
    model.diagnostics["train_accuracy"] = float((preds == y).mean())
    return model


def majority_rate(labels) -> float:
    y = np.asarray(labels, dtype=int)
    return float(max(np.mean(y == c) for c in np.unique(y)))
