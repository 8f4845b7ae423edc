"""Turning an explainers-by-metrics matrix into per-explainer weights.

Three explainers scored on three criteria: complexity is a cost (lower is
better), stability and faithfulness are benefits. TOPSIS measures closeness
to the per-criterion ideal; EDAS measures signed distance from the average
solution. Either score vector normalizes into aggregation weights.
"""

import numpy as np

from explagg import DecisionMatrix, Weights, edas, scores_to_weights, topsis

matrix = np.array([
    #  complexity  stability  faithfulness
    [11.2, 0.95, 0.61],   # lime
    [12.8, 0.99, 0.74],   # shap
    [9.4, 0.55, 0.42],    # anchor
])
dm = DecisionMatrix(matrix,
                    directions=("cost", "benefit", "benefit"),
                    criterion_weights=Weights((1 / 3, 1 / 3, 1 / 3)))

for scorer in (topsis, edas):
    result = scorer(dm)
    weights = scores_to_weights(result)
    print(f"{result.method}: scores {np.round(result.scores, 4)} "
          f"-> weights {np.round(weights.as_array(), 4)}")

# degenerate case: identical alternatives all land on the 0.5 convention
tied = DecisionMatrix(np.tile([1.0, 2.0, 3.0], (3, 1)),
                      ("cost", "benefit", "benefit"),
                      Weights((1 / 3, 1 / 3, 1 / 3)))
print("\nidentical rows:", topsis(tied).scores, topsis(tied).flags)
