"""Routing the pipeline through an external explainer server.

The bridge speaks one JSON object per line over a child process's stdio
(see docs/bridge_protocol.md). Here the reference server from the server/
package supplies the predictor and all three explainers; the local side
only orchestrates, scores, weights, and fuses.

Requires the companion package:  pip install -e ./server
"""

import sys

from explagg.bridge import BridgeClient, BridgePredictor
from explagg.ingest import split
from explagg.pipeline import (PipelineConfig, derive_seed, explain_instance,
                              prepare_context)
from explagg.synth import linear_rows, make_dataset

header, rows = linear_rows(n=300, d=5, seed=2)
data = make_dataset(header, rows)
cfg = PipelineConfig(seed=11, ae_epochs=150, shap_permutations=16)
train, test = split(data, seed=derive_seed(cfg.seed, "split"))
context = prepare_context(cfg, train)

with BridgeClient(command=f"{sys.executable} -m explagg_server.server --stdio") as client:
    info = client.handshake(seed=cfg.seed)
    print("server capabilities:", info["capabilities"])
    client.fit("predictor", "predictor", train)
    for name in cfg.explainers:
        client.fit(f"{name}:orig", name, train)
        client.fit(f"{name}:noisy", name, context.noisy_train)

    def explain_fn(name, x, noisy, seed):
        handle = f"{name}:{'noisy' if noisy else 'orig'}"
        return client.explain(name, handle, x, train.schema, seed=seed)

    predictor = BridgePredictor(client, train.schema)
    report = explain_instance(cfg, predictor, train, test.matrix[0], 0,
                              context, explain_fn=explain_fn)

print("weights:", report.weights.values)
print("aggregate ranking:", report.aggregate_ranking.ranks)
print("aggregate metrics:", report.aggregate_metrics.to_json_dict())
