"""Record a bridge session transcript and its resulting report.

Runs one fully seeded explain-instance pipeline against the reference
server, recording every request/response line, and freezes both the
transcript (tests/data/bridge_transcript.jsonl) and the produced report
(tests/data/bridge_report.json). The replay test in tests/test_bridge.py
drives the same pipeline against a scripted server that answers from the
transcript and requires the byte-identical report.

Rerun after any change that affects wire bytes or report contents:

    python tools/record_bridge_transcript.py
"""

import json
import sys
from pathlib import Path

from explagg.bridge import BridgeClient, BridgePredictor
from explagg.ingest import split
from explagg.pipeline import (PipelineConfig, derive_seed, explain_instance,
                              prepare_context)
from explagg.synth import linear_rows, make_dataset

DATA_DIR = Path(__file__).parent.parent / "tests" / "data"

FIXTURE_CFG = dict(seed=9, ae_epochs=60, lime_samples=120,
                   shap_permutations=8, n_trees=8, max_depth=4)


def build_fixture():
    header, rows = linear_rows(n=120, d=4, seed=3)
    data = make_dataset(header, rows)
    cfg = PipelineConfig(**FIXTURE_CFG)
    train, test = split(data, seed=derive_seed(cfg.seed, "split"))
    return cfg, train, test


def run_bridged_instance(cfg, train, test, client):
    context = prepare_context(cfg, train)
    client.handshake(seed=cfg.seed)
    client.fit("predictor", "predictor", train)
    for name in cfg.explainers:
        client.fit(f"{name}:orig", name, train)
        client.fit(f"{name}:noisy", name, context.noisy_train)
    predictor = BridgePredictor(client, train.schema)

    def explain_fn(name, x, noisy, seed):
        handle = f"{name}:{'noisy' if noisy else 'orig'}"
        return client.explain(name, handle, x, train.schema, seed=seed)

    return explain_instance(cfg, predictor, train, test.matrix[0], 0,
                            context, explain_fn=explain_fn)


def main():
    cfg, train, test = build_fixture()
    client = BridgeClient(
        command=f"{sys.executable} -m explagg_server.server --stdio")
    transcript = []
    orig_write, orig_readline = client._write, client._readline

    def recording_write(s):
        transcript.append({"request": s.rstrip("\n"), "response": None})
        return orig_write(s)

    def recording_readline():
        line = orig_readline()
        transcript[-1]["response"] = line.rstrip("\n")
        return line

    client._write = recording_write
    client._readline = recording_readline

    report = run_bridged_instance(cfg, train, test, client)
    client.close()
    assert report.error is None, report.error

    DATA_DIR.mkdir(parents=True, exist_ok=True)
    with open(DATA_DIR / "bridge_transcript.jsonl", "w") as fh:
        for pair in transcript:
            fh.write(json.dumps(pair) + "\n")
    (DATA_DIR / "bridge_report.json").write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    print(f"recorded {len(transcript)} exchanges")


if __name__ == "__main__":
    main()
