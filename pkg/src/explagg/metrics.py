"""Rank-based explanation quality metrics and their traditional counterparts.

Three rank-based metrics score an explanation's ranking: a normalized
complexity measure with a rank-dispersion penalty (cost, lower = more
legible), faithfulness (correlation between inverse rank and the prediction
change under per-feature baseline substitution), and stability (Spearman
agreement between explanations fit on original vs perturbed training data).
The traditional entropy/faithfulness/sensitivity forms exist only for the
correlation-validation study.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Explanation, Ranking, minmax_normalize
from .stats import pearson, spearman


@dataclass(frozen=True)
class NrcConfig:
    """Dispersion-penalty weight for the rank-based complexity metric."""

    alpha: float = 0.5

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


@dataclass
class MetricVector:
    """One explanation's scores: nrc is a cost, the other two are benefits."""

    nrc: float
    stability: float
    faithfulness: float

    def __post_init__(self):
        for name in ("nrc", "stability", "faithfulness"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
        for name in ("stability", "faithfulness"):
            v = getattr(self, name)
            if not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name} must lie in [-1, 1]")

    def to_json_dict(self) -> dict:
        return {"nrc": float(self.nrc),
                "stability": float(self.stability),
                "faithfulness": float(self.faithfulness)}

    def as_array(self) -> np.ndarray:
        return np.array([self.nrc, self.stability, self.faithfulness])


def nrc(ranking: Ranking, cfg: NrcConfig = NrcConfig()) -> float:
    """Rank-based complexity: (sum_i 1/R_i) * ln(d+1) * (1 + alpha*std(R)).

    std is the population standard deviation of the rank vector. Mass ties
    near the top raise the reciprocal-rank sum and shrink the dispersion
    term, which is exactly the signal separating near-uniform importance
    profiles from concentrated ones.
    """
    r = ranking.ranks.astype(float)
    d = r.size
    return float((1.0 / r).sum() * np.log(d + 1.0) * (1.0 + cfg.alpha * r.std()))


def _baseline_deltas(predict, x, baseline) -> np.ndarray:
    """|f(x) - f(x with x_i := baseline_i)| for every feature i, one at a time."""
    x = np.asarray(x, dtype=float)
    baseline = np.asarray(baseline, dtype=float)
    if x.shape != baseline.shape:
        raise ValueError("baseline must have the same shape as x")
    d = x.size
    batch = np.tile(x, (d + 1, 1))
    for i in range(d):
        batch[i + 1, i] = baseline[i]
    preds = np.asarray(predict(batch), dtype=float)
    return np.abs(preds[0] - preds[1:])


def rank_faithfulness(predict, expl_rank: Ranking, x, baseline) -> float:
    """Pearson correlation between 1/rank and the per-feature prediction change.

    ``predict`` maps a batch of rows to positive-class probabilities. A
    constant vector on either side yields 0.
    """
    deltas = _baseline_deltas(predict, x, baseline)
    if deltas.size != expl_rank.d:
        raise ValueError("instance length does not match ranking")
    if deltas.size < 2:
        return 0.0
    return pearson(1.0 / expl_rank.ranks.astype(float), deltas)


def rank_stability(e1: Explanation, e2: Explanation) -> float:
    """Spearman correlation of two score vectors for the same instance.

    Callers supply e1 from an explainer fit on the original training data
    and e2 from the same explainer fit on a noisy variant.
    """
    if e1.schema.names != e2.schema.names:
        raise ValueError("explanations must share a schema")
    if e1.schema.d < 2:
        return 0.0
    return spearman(e1.scores, e2.scores)


def traditional_complexity(expl: Explanation) -> float:
    """Entropy of the fractional-contribution distribution |s_i| / sum|s_j|."""
    mag = np.abs(expl.scores)
    total = mag.sum()
    if total == 0:
        raise ValueError("all-zero scores have no contribution distribution")
    p = mag / total
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def traditional_faithfulness(predict, expl: Explanation, x, baseline) -> float:
    """Like rank_faithfulness but correlates |score_i| with the prediction change."""
    deltas = _baseline_deltas(predict, x, baseline)
    if deltas.size != expl.schema.d:
        raise ValueError("instance length does not match explanation")
    if deltas.size < 2:
        return 0.0
    return pearson(np.abs(expl.scores), deltas)


def traditional_sensitivity(e1: Explanation, e2: Explanation) -> float:
    """Euclidean distance between min-max-normalized score vectors (lower = stabler)."""
    if e1.schema.names != e2.schema.names:
        raise ValueError("explanations must share a schema")
    a = minmax_normalize(e1.scores)
    b = minmax_normalize(e2.scores)
    return float(np.linalg.norm(a - b))
