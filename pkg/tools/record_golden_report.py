"""Regenerate the golden single-instance report fixture, with stage audits.

The fixture pins the full pipeline's numeric behavior on a small linear
dataset. Before freezing, each stage's numbers are recomputed here from the
report's own building blocks: the MCDM weights from the stored metric
matrix, the fused ranking from the stored component rankings and weights,
and the complexity metric from its formula.

    python tools/record_golden_report.py
"""

import json
from pathlib import Path

import numpy as np

from explagg.core import Weights, competition_ranks, minmax_normalize
from explagg.forest import train_forest
from explagg.ingest import split
from explagg.mcdm import DecisionMatrix, scores_to_weights, topsis
from explagg.pipeline import (PipelineConfig, derive_seed, explain_instance,
                              prepare_context)
from explagg.synth import linear_rows, make_dataset

OUT = Path(__file__).parent.parent / "tests" / "data" / "golden_report.json"


def main():
    header, rows = linear_rows(n=400, d=5, seed=0)
    data = make_dataset(header, rows)
    cfg = PipelineConfig(seed=42, ae_epochs=200, shap_permutations=32,
                         lime_samples=500)
    train, test = split(data, seed=derive_seed(cfg.seed, "split"))
    model = train_forest(train, n_trees=30, max_depth=6,
                         seed=derive_seed(cfg.seed, "forest"))
    context = prepare_context(cfg, train)
    report = explain_instance(cfg, model, train, test.matrix[0], 0, context)
    assert report.error is None, report.error
    blob = report.to_json_dict()

    # audit 1: weights from the metric matrix
    matrix = np.array(blob["metric_matrix"])
    dm = DecisionMatrix(matrix, cfg.criterion_directions,
                        Weights(cfg.criterion_weights))
    assert np.allclose(scores_to_weights(topsis(dm)).as_array(),
                       blob["mcdm"]["weights"], atol=1e-12)

    # audit 2: fused ranking from component rankings and weights
    totals = np.zeros(5)
    for name, w in zip(blob["explainers"], blob["mcdm"]["weights"]):
        ranks = np.array(blob["rankings"][name]["ranks"], float)
        totals += w * minmax_normalize(1.0 / ranks ** 2)
    assert competition_ranks(totals).tolist() == (
        blob["aggregate"]["ranking"]["ranks"])

    # audit 3: complexity values from the formula
    for name in blob["explainers"]:
        ranks = np.array(blob["rankings"][name]["ranks"], float)
        value = (1 / ranks).sum() * np.log(6) * (1 + 0.5 * ranks.std())
        assert abs(value - blob["metrics"][name]["nrc"]) < 1e-12

    OUT.write_text(json.dumps(blob, indent=2, sort_keys=True) + "\n")
    print(f"golden report written to {OUT}")


if __name__ == "__main__":
    main()
