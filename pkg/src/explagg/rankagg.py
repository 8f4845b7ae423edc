"""Weighted fusion of component rankings into one consensus ranking.

All three aggregators operate on rank-derived values only: the weighted sum
consumes min-max-normalized squared-inverse-rank scores, Borda fusion uses
classic (d - rank) points, and the Condorcet method counts weighted pairwise
rank contests resolved by Copeland scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (Ranking, Weights, competition_ranks, minmax_normalize,
                   squared_inverse_scores)


@dataclass
class AggregationInput:
    """Component rankings over a shared schema plus one weight per component."""

    rankings: tuple[Ranking, ...]
    weights: Weights

    def __post_init__(self):
        self.rankings = tuple(self.rankings)
        if len(self.rankings) < 1:
            raise ValueError("need at least one ranking")
        schema = self.rankings[0].schema
        for r in self.rankings[1:]:
            if r.schema.names != schema.names:
                raise ValueError("all rankings must share a schema")
        if len(self.weights.values) != len(self.rankings):
            raise ValueError("one weight per ranking required")

    @property
    def schema(self):
        return self.rankings[0].schema

    def rank_matrix(self) -> np.ndarray:
        return np.vstack([r.ranks for r in self.rankings]).astype(float)


def wsum_aggregate(agg_in: AggregationInput) -> Ranking:
    """Weighted sum of normalized squared-inverse-rank scores."""
    w = agg_in.weights.as_array()
    totals = np.zeros(agg_in.schema.d)
    for weight, ranking in zip(w, agg_in.rankings):
        totals += weight * minmax_normalize(squared_inverse_scores(ranking))
    return Ranking(agg_in.schema, competition_ranks(totals))


def borda_aggregate(agg_in: AggregationInput) -> Ranking:
    """Weighted Borda fusion: points per component are (d - rank)."""
    w = agg_in.weights.as_array()
    d = agg_in.schema.d
    totals = np.zeros(d)
    for weight, ranking in zip(w, agg_in.rankings):
        totals += weight * (d - ranking.ranks.astype(float))
    return Ranking(agg_in.schema, competition_ranks(totals))


def _borda_totals(agg_in: AggregationInput) -> np.ndarray:
    w = agg_in.weights.as_array()
    d = agg_in.schema.d
    return np.sum(w[:, None] * (d - agg_in.rank_matrix()), axis=0)


def condorcet_aggregate(agg_in: AggregationInput) -> Ranking:
    """Weighted Condorcet with Copeland scoring.

    The margin for features (a, b) is sum_e w_e * sign(rank_eb - rank_ea);
    a positive margin is a win for a. Copeland score = wins - losses over
    all pairs; residual ties are broken by the weighted Borda total.
    Features equal on both keys share a min-competition rank.
    """
    ranks = agg_in.rank_matrix()
    w = agg_in.weights.as_array()
    d = agg_in.schema.d

    copeland = np.zeros(d)
    for a in range(d):
        for b in range(a + 1, d):
            margin = float(np.sum(w * np.sign(ranks[:, b] - ranks[:, a])))
            if margin > 0:
                copeland[a] += 1
                copeland[b] -= 1
            elif margin < 0:
                copeland[a] -= 1
                copeland[b] += 1

    borda = _borda_totals(agg_in)
    # lexicographic competition ranks on (copeland, borda)
    greater = (copeland[None, :] > copeland[:, None]) | (
        (copeland[None, :] == copeland[:, None]) & (borda[None, :] > borda[:, None])
    )
    out = greater.sum(axis=1).astype(int) + 1
    return Ranking(agg_in.schema, out)


AGGREGATORS = {
    "wsum": wsum_aggregate,
    "borda": borda_aggregate,
    "condorcet": condorcet_aggregate,
}


def run_aggregator(name: str, agg_in: AggregationInput) -> Ranking:
    if name not in AGGREGATORS:
        raise ValueError(f"unknown aggregator {name!r}; expected one of {sorted(AGGREGATORS)}")
    return AGGREGATORS[name](agg_in)
