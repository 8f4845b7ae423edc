"""Command-line entry point.

Subcommands: ``train`` (fit the reference forest), ``explain`` (one-instance
aggregation report), ``experiment`` (multi-instance average-rank tables),
``mcdm`` (standalone decision-matrix scorer), and ``rq1`` (rank-based vs
traditional metric correlations). Every command honors --seed, emits its
deterministic report(s) plus a separate manifest.json with timings/hashes,
and exits 0 on success, 1 on usage errors, 2 on data errors, 3 on
computation errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bridge import BridgeError, bridge_session
from .core import Weights
from .ingest import DataError, Dataset, apply_manifest, coerce_kinds, load_csv, preprocess, split
from .forest import ForestModel, majority_rate, train_forest
from .mcdm import DecisionMatrix, run_mcdm
from .pipeline import (PipelineConfig, derive_seed, explain_instance,
                       prepare_context, render_markdown_table, run_experiment,
                       run_rq1)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_COMPUTE = 3

logger = logging.getLogger("explagg")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


def _build_config(args) -> PipelineConfig:
    obj = {}
    if args.config:
        obj = _load_json(args.config)
    cfg = PipelineConfig.from_json_dict(obj)
    # flags override config fields
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "mcdm_method", None):
        cfg.mcdm_method = args.mcdm_method
    if getattr(args, "agg", None):
        cfg.aggregator = args.agg
    if getattr(args, "explainers", None):
        cfg.explainers = tuple(args.explainers.split(","))
    return cfg


def _load_dataset(args) -> tuple[Dataset, dict]:
    raw = load_csv(args.dataset)
    roles = {}
    if getattr(args, "dataset_config", None):
        roles = _load_json(args.dataset_config)
    label = getattr(args, "label", None) or roles.get("label")
    if not label:
        raise UsageError("provide --label or a --dataset-config with a label field")
    categorical = roles.get("categorical") or ()
    numeric = roles.get("numeric") or ()
    if categorical or numeric:
        raw = coerce_kinds(raw, categorical, numeric)
    onehot_max = roles.get("onehot_max", 10)
    data = preprocess(raw, label, onehot_max=onehot_max)
    return data, roles


def _write_manifest(out_dir: Path, command: str, args, cfg, inputs: list,
                    outputs: list, started: float) -> None:
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "config": cfg.to_json_dict() if cfg is not None else None,
        "seed": None if cfg is None else cfg.seed,
        "versions": {
            "explagg": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "input_hashes": {str(p): _sha256_file(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "timings": {"total_seconds": round(time.time() - started, 3)},
    }
    _dump_json(manifest, out_dir / "manifest.json")


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_train(args) -> int:
    started = time.time()
    cfg = _build_config(args)
    data, roles = _load_dataset(args)
    train, test = split(data, ratio=cfg.split_ratio,
                        seed=derive_seed(cfg.seed, "split"), stratified=True)
    model = train_forest(train, n_trees=cfg.n_trees, max_depth=cfg.max_depth,
                         seed=derive_seed(cfg.seed, "forest"))
    test_preds = (model.predict_proba(test.matrix) >= 0.5).astype(int)
    test_acc = float((test_preds == test.labels).mean())

    out = _out_dir(args)
    model_file = out / "model.json"
    payload = {
        "forest": model.to_json_dict(),
        "split": {"seed": derive_seed(cfg.seed, "split"),
                  "ratio": cfg.split_ratio, "stratified": True},
        "preprocess_manifest": train.manifest,
        "label": roles.get("label", getattr(args, "label", None)),
        "dataset_roles": roles,
    }
    _dump_json(payload, model_file)
    _write_manifest(out, "train", args, cfg, [args.dataset], [model_file], started)
    if not args.quiet:
        print(f"train accuracy {model.diagnostics['train_accuracy']:.4f}, "
              f"test accuracy {test_acc:.4f} "
              f"(majority baseline {majority_rate(test.labels):.4f})")
        print(f"model written to {model_file}")
    return EXIT_OK


def _rebuild_partitions(args, payload) -> tuple[Dataset, Dataset]:
    raw = load_csv(args.dataset)
    roles = payload.get("dataset_roles") or {}
    categorical = roles.get("categorical") or ()
    numeric = roles.get("numeric") or ()
    if categorical or numeric:
        raw = coerce_kinds(raw, categorical, numeric)
    manifest = payload["preprocess_manifest"]
    matrix, labels = apply_manifest(raw, manifest)
    schema = ForestModel.from_json_dict(payload["forest"]).schema
    data = Dataset(matrix, schema, labels, manifest)
    info = payload["split"]
    return split(data, ratio=info["ratio"], seed=info["seed"],
                 stratified=info["stratified"])


def cmd_explain(args) -> int:
    started = time.time()
    cfg = _build_config(args)
    payload = _load_json(args.model)
    model = ForestModel.from_json_dict(payload["forest"])
    train, test = _rebuild_partitions(args, payload)

    if (args.instance_index is None) == (args.instance_json is None):
        raise UsageError("provide exactly one of --instance-index or --instance-json")
    if args.instance_index is not None:
        if not 0 <= args.instance_index < test.n_rows:
            raise UsageError(f"instance index must lie in [0, {test.n_rows - 1}]")
        x = test.matrix[args.instance_index]
        instance_id = args.instance_index
    else:
        obj = _load_json(args.instance_json)
        x = np.asarray(obj["values"], dtype=float)
        if x.size != train.d:
            raise DataError(f"instance has {x.size} values, schema expects {train.d}")
        instance_id = int(obj.get("id", 0))

    context = prepare_context(cfg, train)
    if args.bridge:
        client, predictor, explain_fn = bridge_session(
            cfg, train, context.noisy_train, command=args.bridge)
        try:
            report = explain_instance(cfg, predictor, train, x, instance_id,
                                      context, explain_fn=explain_fn)
        finally:
            client.close()
    else:
        report = explain_instance(cfg, model, train, x, instance_id, context)

    if report.error is not None:
        raise RuntimeError(f"stage {report.error['stage']}: {report.error['message']}")
    out = _out_dir(args)
    report_file = out / "report.json"
    _dump_json(report.to_json_dict(), report_file)
    _write_manifest(out, "explain", args, cfg,
                    [args.dataset, args.model], [report_file], started)
    if not args.quiet:
        print(f"report written to {report_file}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    started = time.time()
    cfg = _build_config(args)
    data, _ = _load_dataset(args)
    report = run_experiment(cfg, data, args.n, jobs=args.jobs,
                            bridge_command=args.bridge)
    out = _out_dir(args)
    report_file = out / "experiment.json"
    table_file = out / "table.md"
    _dump_json(report.to_json_dict(), report_file)
    table_file.write_text(render_markdown_table(report))
    _write_manifest(out, "experiment", args, cfg, [args.dataset],
                    [report_file, table_file], started)
    if not args.quiet:
        print(render_markdown_table(report))
        print(f"report written to {report_file}")
    return EXIT_OK


def cmd_mcdm(args) -> int:
    started = time.time()
    sidecar = _load_json(args.directions)
    directions = sidecar.get("directions")
    if not directions:
        raise DataError(f"{args.directions}: missing 'directions'")
    rows = []
    with open(args.matrix) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            try:
                rows.append([float(v) for v in fields])
            except ValueError:
                if rows:
                    raise DataError(f"{args.matrix}: non-numeric row {line!r}")
                continue  # header row
    if not rows:
        raise DataError(f"{args.matrix}: no numeric rows")
    values = np.asarray(rows, dtype=float)
    weights = sidecar.get("weights")
    w = Weights(tuple(weights)) if weights else Weights.uniform(values.shape[1])
    dm = DecisionMatrix(values, tuple(directions), w)
    method = args.mcdm_method or "topsis"
    res = run_mcdm(method, dm)
    result = {"method": res.method,
              "scores": [float(s) for s in res.scores],
              "flags": list(res.flags)}
    if args.out:
        out = _out_dir(args)
        result_file = out / "mcdm.json"
        _dump_json(result, result_file)
        _write_manifest(out, "mcdm", args, None,
                        [args.matrix, args.directions], [result_file], started)
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_aggregate(args) -> int:
    started = time.time()
    from .core import Ranking
    from .rankagg import AggregationInput, run_aggregator

    rankings = []
    schema = None
    for path in args.rankings:
        obj = _load_json(path)
        r = Ranking.from_json_dict(obj, schema=schema)
        schema = r.schema
        rankings.append(r)
    wobj = _load_json(args.weights)
    weights = Weights(tuple(wobj["weights"] if isinstance(wobj, dict) else wobj))
    agg_in = AggregationInput(tuple(rankings), weights)
    method = args.agg or "wsum"
    result = run_aggregator(method, agg_in).to_json_dict()
    result["aggregator"] = method
    if args.out:
        out = _out_dir(args)
        result_file = out / "aggregate.json"
        _dump_json(result, result_file)
        _write_manifest(out, "aggregate", args, None,
                        list(args.rankings) + [args.weights], [result_file], started)
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_rq1(args) -> int:
    started = time.time()
    cfg = _build_config(args)
    data, _ = _load_dataset(args)
    table = run_rq1(cfg, data, args.n)
    out = _out_dir(args)
    report_file = out / "rq1.json"
    _dump_json(table, report_file)
    _write_manifest(out, "rq1", args, cfg, [args.dataset], [report_file], started)
    if not args.quiet:
        print(json.dumps(table["correlations"], indent=2, sort_keys=True))
        print(f"report written to {report_file}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _add_common(p: _Parser) -> None:
    p.add_argument("--config", help="pipeline config JSON; flags override fields")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel instance workers")
    p.add_argument("--mcdm", dest="mcdm_method", choices=["topsis", "edas"])
    p.add_argument("--agg", choices=["wsum", "borda", "condorcet"])
    p.add_argument("--explainers", help="comma-separated subset of lime,shap,anchor")
    p.add_argument("--bridge", help="command for an external explainer server")
    p.add_argument("--out", help="output directory")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> _Parser:
    parser = _Parser(prog="explagg",
                     description="Aggregate feature-importance explanations into "
                                 "one robust ranking")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the reference forest")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dataset-config", help="column-role JSON")
    p.add_argument("--label", help="label column (when no dataset config)")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="explain one instance")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--instance-index", type=int)
    p.add_argument("--instance-json")
    _add_common(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("experiment", help="multi-instance average-rank study")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dataset-config")
    p.add_argument("--label")
    p.add_argument("-n", type=int, default=10, help="instances to sample")
    _add_common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("mcdm", help="score a decision matrix")
    p.add_argument("--matrix", required=True, help="CSV, rows = alternatives")
    p.add_argument("--directions", required=True,
                   help="JSON sidecar with directions (and optional weights)")
    _add_common(p)
    p.set_defaults(func=cmd_mcdm)

    p = sub.add_parser("aggregate", help="fuse ranking JSON files with weights")
    p.add_argument("--rankings", nargs="+", required=True,
                   help="ranking JSON files over the same features")
    p.add_argument("--weights", required=True,
                   help="JSON weights file ({\"weights\": [...]} or a bare list)")
    _add_common(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("rq1", help="rank-based vs traditional metric correlations")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dataset-config")
    p.add_argument("--label")
    p.add_argument("-n", type=int, default=100, help="instances to sample")
    _add_common(p)
    p.set_defaults(func=cmd_rq1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.WARNING if args.quiet else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s")
        if args.bridge and args.func in (cmd_train, cmd_mcdm, cmd_rq1, cmd_aggregate):
            raise UsageError(f"{args.command} does not support --bridge")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (BridgeError, ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
