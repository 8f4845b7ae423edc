"""The whole workflow on one synthetic table.

Explain one instance (three explainers -> metric matrix -> TOPSIS weights ->
weighted-sum fusion -> the aggregate scored with the same metrics), then run
the multi-instance experiment and print the average-rank table.
"""

import numpy as np

from explagg import PipelineConfig, run_experiment
from explagg.forest import train_forest
from explagg.ingest import split
from explagg.pipeline import (derive_seed, explain_instance, prepare_context,
                              render_markdown_table)
from explagg.synth import make_dataset, nonlinear_rows

header, rows = nonlinear_rows(n=600, d=8, seed=0)
data = make_dataset(header, rows)
cfg = PipelineConfig(seed=7, mcdm_method="topsis", aggregator="wsum",
                     ae_epochs=250, lime_samples=500, shap_permutations=32)

train, test = split(data, seed=derive_seed(cfg.seed, "split"))
model = train_forest(train, n_trees=cfg.n_trees, max_depth=cfg.max_depth,
                     seed=derive_seed(cfg.seed, "forest"))
context = prepare_context(cfg, train)

report = explain_instance(cfg, model, train, test.matrix[0], 0, context)
print("metric matrix (rows = lime, shap, anchor | nrc, stability, faithfulness):")
print(np.round(report.metric_matrix, 4))
print("mcdm weights:", np.round(report.weights.as_array(), 4))
print("aggregate ranking:", report.aggregate_ranking.ranks)
print("aggregate metrics:", report.aggregate_metrics.to_json_dict())

print("\naverage ranks over 5 instances (lower = better, counts = methods "
      "significantly worse):")
experiment = run_experiment(cfg, data, n_instances=5)
print(render_markdown_table(experiment))
