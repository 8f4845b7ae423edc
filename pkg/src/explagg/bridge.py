"""Client side of the line-delimited JSON protocol for external explainers.

One JSON object per line, strict request/response id matching, at most one
outstanding request per connection. The transport is a child process's
standard streams by default; ``host:port`` TCP uses identical framing.
Dataset payloads are hashed canonically and the server must echo the hash
back in its fit acknowledgement.
"""

from __future__ import annotations

import hashlib
import json
import shlex
import socket
import subprocess

import numpy as np

from .core import Explanation, FeatureSchema
from .ingest import Dataset

PROTOCOL_VERSION = 1


class BridgeError(Exception):
    """Malformed line, id mismatch, hash mismatch, or server-reported error."""


def canonical_json(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def payload_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def dataset_payload(data: Dataset) -> dict:
    return {
        "columns": list(data.schema.names),
        "kinds": list(data.schema.kinds),
        "matrix": [[float(v) for v in row] for row in data.matrix],
        "labels": None if data.labels is None else [int(v) for v in data.labels],
    }


class BridgeClient:
    """One logical session against a bridge server."""

    def __init__(self, command: str | None = None, address: str | None = None,
                 timeout: float = 120.0):
        if (command is None) == (address is None):
            raise ValueError("provide exactly one of command or address")
        self._next_id = 0
        self._proc = None
        self._sock = None
        if command is not None:
            self._proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE,
                stdout=subprocess.PIPE, text=True, bufsize=1)
            self._write = self._proc.stdin.write
            self._flush = self._proc.stdin.flush
            self._readline = self._proc.stdout.readline
        else:
            host, _, port = address.rpartition(":")
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            self._file = self._sock.makefile("rw", encoding="utf-8", newline="\n")
            self._write = self._file.write
            self._flush = self._file.flush
            self._readline = self._file.readline
        self.server_info: dict = {}

    # -- transport ----------------------------------------------------------

    def request(self, op: str, **payload) -> dict:
        req_id = self._next_id
        self._next_id += 1
        message = {"op": op, "id": req_id, **payload}
        self._write(json.dumps(message, separators=(",", ":")) + "\n")
        self._flush()
        line = self._readline()
        if not line:
            raise BridgeError(f"connection closed while awaiting response to {op!r}")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeError(f"malformed response line: {line!r}") from exc
        if response.get("id") != req_id:
            raise BridgeError(f"response id {response.get('id')!r} does not match "
                              f"request id {req_id} (line: {line!r})")
        if "error" in response:
            raise BridgeError(f"server error for op {op!r}: {response['error']}")
        return response

    def close(self) -> None:
        try:
            if self._proc is not None and self._proc.poll() is None:
                try:
                    self.request("shutdown")
                except BridgeError:
                    pass
                self._proc.stdin.close()
                self._proc.wait(timeout=10)
            if self._sock is not None:
                try:
                    self.request("shutdown")
                except (BridgeError, OSError):
                    pass
                self._sock.close()
        except Exception:
            if self._proc is not None:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- protocol operations --------------------------------------------------

    def handshake(self, seed: int = 0) -> dict:
        resp = self.request("handshake", version=PROTOCOL_VERSION, seed=seed)
        if resp.get("version") != PROTOCOL_VERSION:
            raise BridgeError(f"protocol version mismatch: {resp.get('version')!r}")
        self.server_info = {k: v for k, v in resp.items() if k != "id"}
        return self.server_info

    def fit(self, handle: str, explainer: str, data: Dataset) -> str:
        payload = dataset_payload(data)
        digest = payload_hash(payload)
        resp = self.request("fit", handle=handle, explainer=explainer,
                            data=payload, sha256=digest)
        if resp.get("sha256") != digest:
            raise BridgeError(f"fit hash mismatch for handle {handle!r}: "
                              f"sent {digest}, got {resp.get('sha256')!r}")
        return resp.get("handle", handle)

    def predict(self, rows) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        resp = self.request("predict", rows=[[float(v) for v in r] for r in rows])
        probs = np.asarray(resp.get("probs", []), dtype=float)
        if probs.shape[0] != rows.shape[0]:
            raise BridgeError(f"expected {rows.shape[0]} probabilities, "
                              f"got {probs.shape[0]}")
        if np.any(~np.isfinite(probs)) or np.any((probs < 0) | (probs > 1)):
            raise BridgeError(f"probabilities outside [0, 1]: {probs.tolist()}")
        return probs

    def explain(self, explainer: str, handle: str, row,
                schema: FeatureSchema, seed: int = 0) -> Explanation:
        resp = self.request("explain", explainer=explainer, handle=handle,
                            row=[float(v) for v in np.asarray(row, float)],
                            seed=int(seed))
        scores = np.asarray(resp.get("scores", []), dtype=float)
        if scores.shape[0] != schema.d:
            raise BridgeError(f"expected {schema.d} scores, got {scores.shape[0]}")
        return Explanation(schema, scores, source=explainer,
                           diagnostics=resp.get("diagnostics", {}))


class BridgePredictor:
    """Predictor contract realized over a bridge session."""

    def __init__(self, client: BridgeClient, schema: FeatureSchema):
        self.client = client
        self.schema = schema

    def predict_proba(self, rows) -> np.ndarray:
        return self.client.predict(rows)


def bridge_session(cfg, train: Dataset, noisy_train: Dataset,
                   command: str | None = None, address: str | None = None):
    """Open a session, train the remote predictor, and fit every explainer.

    Returns (client, predictor, explain_fn) where explain_fn(name, x, noisy,
    seed) matches the pipeline's explainer hook.
    """
    client = BridgeClient(command=command, address=address)
    client.handshake(seed=cfg.seed)
    client.fit("predictor", "predictor", train)
    for name in cfg.explainers:
        client.fit(f"{name}:orig", name, train)
        client.fit(f"{name}:noisy", name, noisy_train)
    predictor = BridgePredictor(client, train.schema)

    def explain_fn(name: str, x, noisy: bool, seed: int) -> Explanation:
        handle = f"{name}:{'noisy' if noisy else 'orig'}"
        return client.explain(name, handle, x, train.schema, seed=seed)

    return client, predictor, explain_fn
