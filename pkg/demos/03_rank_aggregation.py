"""Fusing weighted rankings three ways.

The weighted sum consumes min-max-normalized squared-inverse-rank scores,
Borda fusion uses (d - rank) points, and the Condorcet method plays weighted
pairwise contests scored by Copeland. All three honor unanimity and weight
dictatorship; the Condorcet variant also seats any pairwise-unbeaten feature
at rank 1.
"""

from explagg import (AggregationInput, FeatureSchema, Ranking, Weights,
                     borda_aggregate, condorcet_aggregate, wsum_aggregate)

schema = FeatureSchema.all_numeric(["a", "b", "c"])
votes = (Ranking(schema, [1, 2, 3]),
         Ranking(schema, [3, 2, 1]))

for w in ((0.7, 0.3), (0.5, 0.5), (1.0, 0.0)):
    agg_in = AggregationInput(votes, Weights(w))
    print(f"weights {w}: wsum {wsum_aggregate(agg_in).ranks}, "
          f"borda {borda_aggregate(agg_in).ranks}, "
          f"condorcet {condorcet_aggregate(agg_in).ranks}")

# a perfect three-way cycle: every pairwise contest nets to zero, so the
# Condorcet method ties all three features at rank 1
cycle = AggregationInput(
    (Ranking(schema, [1, 2, 3]),
     Ranking(schema, [3, 1, 2]),
     Ranking(schema, [2, 3, 1])),
    Weights((1 / 3, 1 / 3, 1 / 3)))
print("\ncycle under condorcet:", condorcet_aggregate(cycle).ranks)
