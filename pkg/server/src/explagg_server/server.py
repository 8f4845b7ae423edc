"""Bridge server: line-delimited JSON over stdio or TCP.

One JSON object per line, responses echo the request id, one outstanding
request at a time. Ops: handshake, fit (predictor or explainer state,
dataset hash verified and echoed), predict, explain, shutdown. Errors are
returned as {"id": ..., "error": "..."} and never terminate the loop.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import socketserver
import sys

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from .explainers import FitState, anchor_explain, lime_explain, shap_explain

PROTOCOL_VERSION = 1

DEFAULT_PARAMS = {
    "forest_trees": 100,
    "lime_samples": 1000,
    "lime_top_k": 10,
    "lime_ridge_alpha": 1.0,
    "shap_permutations": 50,
    "shap_background_rows": 64,
    "anchor_epsilon": 0.05,
    "anchor_bins": 4,
}


def canonical_json(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def payload_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


class ServerState:
    """Predictor, per-handle fit states, and session configuration."""

    def __init__(self, params: dict | None = None):
        self.params = {**DEFAULT_PARAMS, **(params or {})}
        self.seed = 0
        self.predictor: RandomForestClassifier | None = None
        self.fits: dict[str, FitState] = {}

    # -- op handlers -------------------------------------------------------

    def on_handshake(self, req: dict) -> dict:
        if req.get("version") != PROTOCOL_VERSION:
            raise ValueError(f"unsupported protocol version {req.get('version')!r}")
        self.seed = int(req.get("seed", 0))
        return {"version": PROTOCOL_VERSION,
                "capabilities": ["fit", "predict", "explain"],
                "explainers": ["lime", "shap", "anchor"],
                "params": self.params}

    def on_fit(self, req: dict) -> dict:
        data = req["data"]
        digest = payload_hash(data)
        if req.get("sha256") != digest:
            raise ValueError(f"dataset hash mismatch: client sent "
                             f"{req.get('sha256')!r}, payload hashes to {digest}")
        explainer = req["explainer"]
        handle = req.get("handle", explainer)
        if explainer == "predictor":
            labels = data.get("labels")
            if labels is None:
                raise ValueError("predictor fit requires labels")
            matrix = np.asarray(data["matrix"], dtype=float)
            y = np.asarray(labels, dtype=int)
            if np.unique(y).size < 2:
                raise ValueError("labels contain a single class")
            model = RandomForestClassifier(
                n_estimators=self.params["forest_trees"], random_state=self.seed)
            model.fit(matrix, y)
            self.predictor = model
        elif explainer in ("lime", "shap", "anchor"):
            self.fits[handle] = FitState.from_payload(data)
        else:
            raise ValueError(f"unknown explainer {explainer!r}")
        return {"handle": handle, "sha256": digest}

    def predict_proba(self, rows: np.ndarray) -> np.ndarray:
        if self.predictor is None:
            raise ValueError("predictor not fit yet")
        return self.predictor.predict_proba(np.atleast_2d(rows))[:, 1]

    def on_predict(self, req: dict) -> dict:
        probs = self.predict_proba(np.asarray(req["rows"], dtype=float))
        return {"probs": [float(p) for p in probs]}

    def on_explain(self, req: dict) -> dict:
        name = req["explainer"]
        handle = req.get("handle", name)
        if handle not in self.fits:
            raise ValueError(f"unknown fit handle {handle!r}")
        fit = self.fits[handle]
        row = np.asarray(req["row"], dtype=float)
        if row.size != fit.d:
            raise ValueError(f"row has {row.size} values, fit expects {fit.d}")
        rng = np.random.default_rng([self.seed, int(req.get("seed", 0))])
        if name == "lime":
            return lime_explain(self.predict_proba, row, fit, rng,
                                n_samples=self.params["lime_samples"],
                                top_k=self.params["lime_top_k"],
                                ridge_alpha=self.params["lime_ridge_alpha"])
        if name == "shap":
            return shap_explain(self.predict_proba, row, fit, rng,
                                n_permutations=self.params["shap_permutations"],
                                background_rows=self.params["shap_background_rows"])
        if name == "anchor":
            return anchor_explain(self.predict_proba, row, fit, rng,
                                  epsilon=self.params["anchor_epsilon"],
                                  n_bins=self.params["anchor_bins"])
        raise ValueError(f"unknown explainer {name!r}")


def handle_line(state: ServerState, line: str) -> tuple[str, bool]:
    """Process one request line; returns (response line, keep_running)."""
    try:
        req = json.loads(line)
    except json.JSONDecodeError:
        return json.dumps({"id": None, "error": "malformed request line"}), True
    if not isinstance(req, dict):
        return json.dumps({"id": None, "error": "request must be an object"}), True
    req_id = req.get("id")
    op = req.get("op")
    try:
        if op == "handshake":
            body = state.on_handshake(req)
        elif op == "fit":
            body = state.on_fit(req)
        elif op == "predict":
            body = state.on_predict(req)
        elif op == "explain":
            body = state.on_explain(req)
        elif op == "shutdown":
            return json.dumps({"id": req_id, "ok": True}), False
        else:
            return json.dumps({"id": req_id, "error": f"unknown op {op!r}"}), True
    except Exception as exc:  # noqa: BLE001 - reported to the client
        return json.dumps({"id": req_id, "error": str(exc)}), True
    return json.dumps({"id": req_id, **body}), True


def serve_stdio() -> None:
    state = ServerState()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        response, keep_running = handle_line(state, line)
        sys.stdout.write(response + "\n")
        sys.stdout.flush()
        if not keep_running:
            break


def serve_tcp(port: int) -> None:
    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            state = ServerState()
            for raw in self.rfile:
                line = raw.decode().strip()
                if not line:
                    continue
                response, keep_running = handle_line(state, line)
                self.wfile.write((response + "\n").encode())
                self.wfile.flush()
                if not keep_running:
                    break

    with socketserver.TCPServer(("127.0.0.1", port), Handler) as server:
        actual = server.server_address[1]
        print(f"listening on 127.0.0.1:{actual}", file=sys.stderr, flush=True)
        server.serve_forever()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="explagg-server",
        description="Serve LIME/SHAP/ANCHOR explainers and a random-forest "
                    "predictor over the bridge protocol")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--stdio", action="store_true",
                       help="serve one session on stdin/stdout")
    group.add_argument("--port", type=int, help="serve TCP sessions on this port")
    args = parser.parse_args(argv)
    if args.stdio:
        serve_stdio()
    else:
        serve_tcp(args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
