"""Minimal scripted bridge servers for client-side protocol tests.

Modes: good (well-behaved), echo (returns the request payload),
badprob (out-of-range probability), idmismatch (wrong response id),
badhash (wrong fit digest), malformed (non-JSON line).
"""

import json
import sys


def respond(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "good"
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        op, rid = req["op"], req["id"]
        if mode == "malformed":
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        if mode == "idmismatch":
            respond({"id": rid + 999, "ok": True})
            continue
        if mode == "echo":
            respond({"id": rid, "echo": req})
            if op == "shutdown":
                break
            continue
        if op == "handshake":
            respond({"id": rid, "version": 1,
                     "capabilities": ["predict", "fit", "explain"],
                     "explainers": ["lime", "shap", "anchor"]})
        elif op == "fit":
            sha = "0" * 64 if mode == "badhash" else req["sha256"]
            respond({"id": rid, "handle": req["handle"], "sha256": sha})
        elif op == "predict":
            rows = req["rows"]
            if mode == "badprob":
                respond({"id": rid, "probs": [1.5] * len(rows)})
            else:
                respond({"id": rid,
                         "probs": [min(1.0, max(0.0, 0.5 + 0.1 * r[0]))
                                   for r in rows]})
        elif op == "explain":
            d = len(req["row"])
            respond({"id": rid,
                     "scores": [(-1) ** j * (j + 1) * 0.1 for j in range(d)]})
        elif op == "shutdown":
            respond({"id": rid, "ok": True})
            break
        else:
            respond({"id": rid, "error": f"unknown op {op!r}"})


if __name__ == "__main__":
    main()
