"""Rankings and the three rank-based quality metrics.

Build a couple of explanations by hand, derive their rankings, and score
them on complexity (cost), stability, and faithfulness.
"""

import numpy as np

from explagg import (Explanation, FeatureSchema, NrcConfig, nrc,
                     rank_faithfulness, rank_features, rank_stability)

schema = FeatureSchema.all_numeric(["income", "debt", "age", "tenure"])

# signed scores: sign is direction of impact, magnitude is importance
sharp = Explanation(schema, [0.9, -0.5, 0.1, 0.05], source="sharp")
flat = Explanation(schema, [0.3, -0.3, 0.3, 0.3], source="flat")

for e in (sharp, flat):
    ranking = rank_features(e)
    print(f"{e.source}: scores {e.scores} -> ranks {ranking.ranks}, "
          f"complexity {nrc(ranking, NrcConfig(alpha=0.5)):.4f}")
# the flat explanation ties every feature at rank 1: the reciprocal-rank sum
# explodes and the complexity metric (lower = more legible) flags it

# stability: agreement between two fits of the same explainer
nudged = Explanation(schema, [0.85, -0.55, 0.12, 0.04], source="sharp-refit")
flipped = Explanation(schema, [0.05, 0.1, -0.5, 0.9], source="sharp-flipped")
print("\nstability vs nudged refit:", rank_stability(sharp, nudged))
print("stability vs flipped refit:", rank_stability(sharp, flipped))

# faithfulness: does 1/rank track the prediction change when each feature
# is replaced by a baseline value?
coefs = np.array([0.5, 0.3, 0.15, 0.05])
predict = lambda rows: np.atleast_2d(rows) @ coefs
x = np.ones(4)
baseline = np.zeros(4)
print("\nfaithfulness of the sharp ranking:",
      round(rank_faithfulness(predict, rank_features(sharp), x, baseline), 4))
