"""Feature-importance primitives shared by every other module.

The unit of exchange is an :class:`Explanation` (signed per-feature scores)
and the :class:`Ranking` derived from it (rank 1 = most important,
min-competition ties). Everything downstream — quality metrics, MCDM
weighting, rank aggregation — consumes these two types.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

_KINDS = (NUMERIC, CATEGORICAL)


@dataclass(frozen=True)
class FeatureSchema:
    """Names and kinds (numeric vs encoded-categorical) of the feature columns."""

    names: tuple[str, ...]
    kinds: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if len(self.names) < 1:
            raise ValueError("schema needs at least one feature")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        if len(self.kinds) != len(self.names):
            raise ValueError("kinds and names length mismatch")
        for k in self.kinds:
            if k not in _KINDS:
                raise ValueError(f"unknown feature kind {k!r}")

    @property
    def d(self) -> int:
        return len(self.names)

    @classmethod
    def all_numeric(cls, names) -> "FeatureSchema":
        names = tuple(names)
        return cls(names, (NUMERIC,) * len(names))


@dataclass
class Explanation:
    """Signed per-feature importance scores from one explainer.

    The sign carries direction of impact; importance magnitude is the
    absolute value. ``source`` labels the producing explainer.
    """

    schema: FeatureSchema
    scores: np.ndarray
    source: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float).copy()
        if self.scores.ndim != 1 or self.scores.shape[0] != self.schema.d:
            raise ValueError("scores must be a vector of length schema.d")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must all be finite")

    def to_json_dict(self) -> dict:
        out = {"features": list(self.schema.names),
               "scores": [float(s) for s in self.scores]}
        if self.source:
            out["source"] = self.source
        return out

    @classmethod
    def from_json_dict(cls, obj: dict, schema: FeatureSchema | None = None) -> "Explanation":
        names = tuple(obj["features"])
        if schema is None:
            schema = FeatureSchema.all_numeric(names)
        elif schema.names != names:
            raise ValueError("feature names do not match schema")
        return cls(schema, np.asarray(obj["scores"], float), obj.get("source", ""))


@dataclass
class Ranking:
    """Competition ranking of the features, rank 1 = most important.

    Ties share the smallest applicable rank and the following ranks are
    skipped (the "1224" pattern), so for each distinct rank value r the
    number of features with rank < r is exactly r - 1.
    """

    schema: FeatureSchema
    ranks: np.ndarray

    def __post_init__(self):
        self.ranks = np.asarray(self.ranks, dtype=int).copy()
        if self.ranks.ndim != 1 or self.ranks.shape[0] != self.schema.d:
            raise ValueError("ranks must be a vector of length schema.d")
        if self.ranks.min() != 1:
            raise ValueError("smallest rank must be 1")
        for v in np.unique(self.ranks):
            if int((self.ranks < v).sum()) != v - 1:
                raise ValueError("ranks do not form a min-competition ranking")

    @property
    def d(self) -> int:
        return self.schema.d

    def to_json_dict(self) -> dict:
        return {"features": list(self.schema.names),
                "ranks": [int(r) for r in self.ranks]}

    @classmethod
    def from_json_dict(cls, obj: dict, schema: FeatureSchema | None = None) -> "Ranking":
        names = tuple(obj["features"])
        if schema is None:
            schema = FeatureSchema.all_numeric(names)
        elif schema.names != names:
            raise ValueError("feature names do not match schema")
        return cls(schema, np.asarray(obj["ranks"], int))


@dataclass(frozen=True)
class Weights:
    """Nonnegative weights summing to one."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        arr = np.asarray(vals)
        if arr.size == 0:
            raise ValueError("weights must be nonempty")
        if np.any(arr < 0):
            raise ValueError("weights must be nonnegative")
        if abs(arr.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {arr.sum()!r}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @classmethod
    def uniform(cls, n: int) -> "Weights":
        return cls(tuple(1.0 / n for _ in range(n)))


def competition_ranks(values: np.ndarray) -> np.ndarray:
    """Min-competition ranks of ``values`` in descending order.

    rank_i = 1 + #{j : values_j > values_i}; exactly equal values share a rank.
    """
    v = np.asarray(values, dtype=float)
    return (v[None, :] > v[:, None]).sum(axis=1).astype(int) + 1


def rank_features(expl: Explanation) -> Ranking:
    """Rank features by descending importance magnitude |score|.

    Deterministic; exactly equal magnitudes share the smaller rank.
    """
    if not np.all(np.isfinite(expl.scores)):
        raise ValueError("explanation scores must be finite")
    return Ranking(expl.schema, competition_ranks(np.abs(expl.scores)))


def squared_inverse_scores(ranking: Ranking) -> np.ndarray:
    """Map ranks to scores 1/rank^2 (strictly decreasing in rank, in (0, 1])."""
    return 1.0 / ranking.ranks.astype(float) ** 2


def minmax_normalize(scores) -> np.ndarray:
    """Linearly rescale to [0, 1]; a constant vector maps to all zeros."""
    arr = np.asarray(scores, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot normalize an empty vector")
    span = arr.max() - arr.min()
    if span == 0:
        return np.zeros_like(arr)
    return (arr - arr.min()) / span
