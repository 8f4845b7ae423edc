"""End-to-end orchestration: explain one instance, or run the experiment harness.

Per instance: run every configured explainer, score each explanation on the
three rank-based metrics (stability against a latent-neighbor-perturbed
refit), weight the explainers with an MCDM scorer over the resulting
matrix, fuse their rankings with a weighted rank aggregator, and evaluate
the aggregate with the same metric code path as the components.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .core import Explanation, Ranking, Weights, rank_features
from .explainers import (ExplainerFitState, _subsample_background,
                         anchor_like_explain, lime_like_explain, refit,
                         shapley_sample_explain)
from .ingest import Dataset, split
from .forest import train_forest
from .mcdm import DecisionMatrix, run_mcdm, scores_to_weights
from .metrics import (MetricVector, NrcConfig, nrc, rank_faithfulness,
                      rank_stability, traditional_complexity,
                      traditional_faithfulness, traditional_sensitivity)
from .perturb import NoiseConfig, train_autoencoder, perturb_dataset
from .rankagg import AggregationInput, run_aggregator
from .stats import average_ranks, count_significantly_worse, spearman

BUILTIN_EXPLAINERS = ("lime", "shap", "anchor")
CRITERIA = ("nrc", "stability", "faithfulness")
AGGREGATE = "aggregate"


def derive_seed(master: int, purpose: str, k: int = 0) -> int:
    """Stable sub-seed for a purpose string and index; reproducible anywhere."""
    ss = np.random.SeedSequence([int(master), zlib.crc32(purpose.encode()), int(k)])
    return int(ss.generate_state(1)[0])


@dataclass
class PipelineConfig:
    """Every knob of the workflow; seeds are explicit, never ambient."""

    explainers: tuple[str, ...] = BUILTIN_EXPLAINERS
    mcdm_method: str = "topsis"
    aggregator: str = "wsum"
    alpha: float = 0.5
    criterion_directions: tuple[str, str, str] = ("cost", "benefit", "benefit")
    criterion_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    lime_samples: int = 1000
    lime_kernel_width: float | None = None
    lime_top_k: int | None = 10
    shap_permutations: int = 64
    shap_background: int = 100
    anchor_epsilon: float = 0.05
    k_neighbors: int = 5
    m_features: int | None = None
    latent_q: int | None = None
    ae_epochs: int = 500
    n_trees: int = 50
    max_depth: int = 8
    split_ratio: float = 0.8
    seed: int = 0

    def __post_init__(self):
        self.explainers = tuple(self.explainers)
        self.criterion_directions = tuple(self.criterion_directions)
        self.criterion_weights = tuple(self.criterion_weights)
        if len(self.explainers) < 1:
            raise ValueError("configure at least one explainer")

    def to_json_dict(self) -> dict:
        out = asdict(self)
        for key in ("explainers", "criterion_directions", "criterion_weights"):
            out[key] = list(out[key])
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class PipelineContext:
    """Shared per-run artifacts: noisy data and fit states for both variants."""

    train: Dataset
    noisy_train: Dataset
    fit_orig: ExplainerFitState
    fit_noisy: ExplainerFitState
    shap_bg_orig: Dataset
    shap_bg_noisy: Dataset
    baseline: np.ndarray


def prepare_context(cfg: PipelineConfig, train: Dataset) -> PipelineContext:
    d = train.d
    q = cfg.latent_q if cfg.latent_q is not None else max(1, int(np.ceil(d / 2)))
    q = min(q, d - 1) if d > 1 else 1
    ae = train_autoencoder(train, q=q, epochs=cfg.ae_epochs,
                           seed=derive_seed(cfg.seed, "autoencoder"))
    noise = NoiseConfig(cfg.k_neighbors, cfg.m_features,
                        seed=derive_seed(cfg.seed, "noise"))
    noisy = perturb_dataset(train, ae, noise)
    fit_orig = refit(train)
    fit_noisy = refit(noisy)
    return PipelineContext(
        train=train,
        noisy_train=noisy,
        fit_orig=fit_orig,
        fit_noisy=fit_noisy,
        shap_bg_orig=Dataset(_subsample_background(train.matrix, cfg.shap_background),
                             train.schema),
        shap_bg_noisy=Dataset(_subsample_background(noisy.matrix, cfg.shap_background),
                              noisy.schema),
        baseline=fit_orig.baseline(),
    )


@dataclass
class AggregationReport:
    """Everything one instance produced, JSON-ready."""

    instance_id: int
    explainer_names: tuple[str, ...]
    explanations: dict[str, Explanation]
    rankings: dict[str, Ranking]
    metric_matrix: np.ndarray | None
    metrics: dict[str, MetricVector]
    mcdm_method: str = ""
    mcdm_scores: list[float] | None = None
    weights: Weights | None = None
    aggregator: str = ""
    aggregate_ranking: Ranking | None = None
    aggregate_metrics: MetricVector | None = None
    diagnostics: dict = field(default_factory=dict)
    error: dict | None = None

    def to_json_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "explainers": list(self.explainer_names),
            "explanations": {k: v.to_json_dict() for k, v in self.explanations.items()},
            "rankings": {k: v.to_json_dict() for k, v in self.rankings.items()},
            "metric_matrix": None if self.metric_matrix is None else
                             [[float(v) for v in row] for row in self.metric_matrix],
            "criteria": list(CRITERIA),
            "metrics": {k: v.to_json_dict() for k, v in self.metrics.items()},
            "mcdm": {"method": self.mcdm_method,
                     "scores": self.mcdm_scores,
                     "weights": None if self.weights is None else list(self.weights.values)},
            "aggregator": self.aggregator,
            "aggregate": {
                "ranking": None if self.aggregate_ranking is None else
                           self.aggregate_ranking.to_json_dict(),
                "metrics": None if self.aggregate_metrics is None else
                           self.aggregate_metrics.to_json_dict(),
            },
            "diagnostics": self.diagnostics,
            "error": self.error,
        }


def _run_explainer(name: str, predict, x, ctx: PipelineContext, cfg: PipelineConfig,
                   noisy: bool, seed: int) -> Explanation:
    if name == "lime":
        fit = ctx.fit_noisy if noisy else ctx.fit_orig
        return lime_like_explain(predict, x, fit, n_samples=cfg.lime_samples,
                                 kernel_width=cfg.lime_kernel_width,
                                 top_k=cfg.lime_top_k, seed=seed)
    if name == "shap":
        bg = ctx.shap_bg_noisy if noisy else ctx.shap_bg_orig
        return shapley_sample_explain(predict, x, bg,
                                      n_permutations=cfg.shap_permutations, seed=seed)
    if name == "anchor":
        data = ctx.noisy_train if noisy else ctx.train
        _, expl = anchor_like_explain(predict, x, data,
                                      epsilon=cfg.anchor_epsilon, seed=seed)
        return expl
    raise ValueError(f"unknown explainer {name!r}")


def _evaluate(ranking: Ranking, expl: Explanation, expl_noisy: Explanation,
              predict, x, baseline, alpha: float) -> MetricVector:
    """Shared metric evaluation used for components and the aggregate alike."""
    return MetricVector(
        nrc=nrc(ranking, NrcConfig(alpha)),
        stability=rank_stability(expl, expl_noisy),
        faithfulness=rank_faithfulness(predict, ranking, x, baseline),
    )


def explain_instance(cfg: PipelineConfig, model, train: Dataset, x,
                     instance_id: int = 0, context: PipelineContext | None = None,
                     explain_fn=None) -> AggregationReport:
    """Run the whole per-instance workflow and package the result.

    ``model`` needs a ``predict_proba`` batch method. ``explain_fn`` may
    replace the built-in explainers (used by the bridge client); it receives
    (name, x, noisy, seed) and returns an Explanation. Stage failures yield
    a partial report with the failing stage tagged.
    """
    report = AggregationReport(instance_id=instance_id,
                               explainer_names=cfg.explainers,
                               explanations={}, rankings={},
                               metric_matrix=None, metrics={})
    x = np.asarray(x, dtype=float)
    predict = model.predict_proba
    stage = "prepare"
    try:
        if context is None:
            context = prepare_context(cfg, train)

        stage = "explain"
        expls: dict[str, Explanation] = {}
        expls_noisy: dict[str, Explanation] = {}
        for name in cfg.explainers:
            seed = derive_seed(cfg.seed, f"explainer:{name}", instance_id)
            if explain_fn is not None:
                expls[name] = explain_fn(name, x, False, seed)
                expls_noisy[name] = explain_fn(name, x, True, seed)
            else:
                expls[name] = _run_explainer(name, predict, x, context, cfg, False, seed)
                expls_noisy[name] = _run_explainer(name, predict, x, context, cfg, True, seed)
        report.explanations = expls
        report.diagnostics["noisy_rankings"] = {
            name: rank_features(e).to_json_dict()["ranks"]
            for name, e in expls_noisy.items()}
        report.diagnostics["explainer"] = {
            name: expls[name].diagnostics for name in cfg.explainers}

        stage = "metrics"
        rankings = {name: rank_features(expls[name]) for name in cfg.explainers}
        report.rankings = rankings
        metrics: dict[str, MetricVector] = {}
        for name in cfg.explainers:
            metrics[name] = _evaluate(rankings[name], expls[name], expls_noisy[name],
                                      predict, x, context.baseline, cfg.alpha)
        report.metrics = metrics
        matrix = np.vstack([metrics[name].as_array() for name in cfg.explainers])
        report.metric_matrix = matrix

        stage = "mcdm"
        report.mcdm_method = cfg.mcdm_method
        if len(cfg.explainers) == 1:
            weights = Weights((1.0,))
            report.mcdm_scores = [1.0]
            report.diagnostics["mcdm_flags"] = ["single explainer, MCDM skipped"]
        else:
            dm = DecisionMatrix(matrix, cfg.criterion_directions,
                                Weights(cfg.criterion_weights))
            res = run_mcdm(cfg.mcdm_method, dm)
            weights = scores_to_weights(res)
            report.mcdm_scores = [float(s) for s in res.scores]
            report.diagnostics["mcdm_flags"] = list(res.flags)
        report.weights = weights

        stage = "aggregate"
        report.aggregator = cfg.aggregator
        agg_in = AggregationInput(tuple(rankings[n] for n in cfg.explainers), weights)
        aggregate = run_aggregator(cfg.aggregator, agg_in)
        report.aggregate_ranking = aggregate
        noisy_rankings = tuple(rank_features(expls_noisy[n]) for n in cfg.explainers)
        aggregate_noisy = run_aggregator(
            cfg.aggregator, AggregationInput(noisy_rankings, weights))

        stage = "aggregate_metrics"
        agg_expl = Explanation(aggregate.schema, -aggregate.ranks.astype(float),
                               source=AGGREGATE)
        agg_expl_noisy = Explanation(aggregate.schema,
                                     -aggregate_noisy.ranks.astype(float),
                                     source=AGGREGATE)
        report.aggregate_metrics = _evaluate(aggregate, agg_expl, agg_expl_noisy,
                                             predict, x, context.baseline, cfg.alpha)
    except Exception as exc:  # noqa: BLE001 - stage errors become report entries
        report.error = {"stage": stage, "message": str(exc)}
    return report


# ---------------------------------------------------------------------------
# experiment harness
# ---------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    """Average ranks and significance counts per method per metric."""

    methods: tuple[str, ...]
    instance_ids: list[int]
    per_metric: dict
    config: dict
    diagnostics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    instance_reports: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "methods": list(self.methods),
            "instance_ids": [int(i) for i in self.instance_ids],
            "per_metric": self.per_metric,
            "config": self.config,
            "diagnostics": self.diagnostics,
            "failures": self.failures,
            "instance_reports": self.instance_reports,
        }


def _worker(payload):
    cfg, model, train, x, instance_id, context = payload
    return explain_instance(cfg, model, train, x, instance_id, context)


def _oriented(metric: str, values: np.ndarray) -> np.ndarray:
    """Orient values so that lower = better for ranking purposes."""
    return values if metric == "nrc" else -values


def summarize_reports(methods, instance_ids, reports, cfg,
                      diagnostics=None) -> ExperimentReport:
    """Build the average-rank/significance summary from per-instance reports."""
    ok = [(i, r) for i, r in zip(instance_ids, reports) if r.error is None]
    failures = [{"instance_id": int(i), **r.error}
                for i, r in zip(instance_ids, reports) if r.error is not None]
    per_metric: dict = {}
    for mi, metric in enumerate(CRITERIA):
        table = np.array([
            [getattr(r.metrics[m], metric) if m != AGGREGATE
             else getattr(r.aggregate_metrics, metric) for m in methods]
            for _, r in ok])
        oriented = _oriented(metric, table)
        ranks = np.vstack([average_ranks(row) for row in oriented])
        avg = ranks.mean(axis=0)
        counts = {}
        for j, method in enumerate(methods):
            if len(ok) >= 2:
                counts[method] = count_significantly_worse(oriented, j)
            else:
                counts[method] = 0
        per_metric[metric] = {
            "average_ranks": {m: float(a) for m, a in zip(methods, avg)},
            "significance_counts": counts,
            "per_instance_values": {m: [float(v) for v in table[:, j]]
                                    for j, m in enumerate(methods)},
            "per_instance_ranks": {m: [float(v) for v in ranks[:, j]]
                                   for j, m in enumerate(methods)},
        }
    return ExperimentReport(
        methods=tuple(methods),
        instance_ids=[int(i) for i in instance_ids],
        per_metric=per_metric,
        config=cfg.to_json_dict(),
        diagnostics=dict(diagnostics or {}),
        failures=failures,
        instance_reports=[r.to_json_dict() for r in reports],
    )


def run_experiment(cfg: PipelineConfig, data: Dataset, n_instances: int,
                   jobs: int = 1, bridge_command: str | None = None) -> ExperimentReport:
    """Split, train the reference forest, and evaluate sampled test instances.

    With a bridge command the predictor and explainers run in the external
    server and instances are evaluated sequentially (one session, one
    outstanding request).
    """
    train, test = split(data, ratio=cfg.split_ratio,
                        seed=derive_seed(cfg.seed, "split"), stratified=True)
    context = prepare_context(cfg, train)

    if n_instances > test.n_rows:
        raise ValueError(f"n_instances={n_instances} exceeds test size {test.n_rows}")
    rng = np.random.default_rng(derive_seed(cfg.seed, "instances"))
    chosen = np.sort(rng.choice(test.n_rows, size=n_instances, replace=False))

    if bridge_command is not None:
        from .bridge import bridge_session
        client, model, explain_fn = bridge_session(cfg, train, context.noisy_train,
                                                   command=bridge_command)
        try:
            reports = [explain_instance(cfg, model, train, test.matrix[i], int(i),
                                        context, explain_fn=explain_fn)
                       for i in chosen]
            test_preds = (model.predict_proba(test.matrix) >= 0.5).astype(int)
            train_acc = None
        finally:
            client.close()
    else:
        model = train_forest(train, n_trees=cfg.n_trees, max_depth=cfg.max_depth,
                             seed=derive_seed(cfg.seed, "forest"))
        payloads = [(cfg, model, train, test.matrix[i], int(i), context)
                    for i in chosen]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                reports = list(pool.map(_worker, payloads))
        else:
            reports = [_worker(p) for p in payloads]
        test_preds = (model.predict_proba(test.matrix) >= 0.5).astype(int)
        train_acc = model.diagnostics.get("train_accuracy")
    diagnostics = {
        "train_accuracy": train_acc,
        "test_accuracy": float((test_preds == test.labels).mean())
                         if test.labels is not None else None,
        "n_train": train.n_rows,
        "n_test": test.n_rows,
    }
    methods = (AGGREGATE,) + cfg.explainers
    return summarize_reports(methods, chosen.tolist(), reports, cfg, diagnostics)


def render_markdown_table(report: ExperimentReport) -> str:
    """Methods-by-metrics table of average ranks with significance counts."""
    lines = ["| Methods | " + " | ".join(CRITERIA) + " |",
             "|" + "---|" * (len(CRITERIA) + 1)]
    for method in report.methods:
        cells = []
        for metric in CRITERIA:
            block = report.per_metric[metric]
            cells.append(f"{block['average_ranks'][method]:.2f} "
                         f"({block['significance_counts'][method]})")
        lines.append(f"| {method} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# metric-validation study (rank-based vs traditional)
# ---------------------------------------------------------------------------

def run_rq1(cfg: PipelineConfig, data: Dataset, n_samples: int) -> dict:
    """Correlate rank-based metrics with their traditional counterparts.

    Every sampled instance is explained by every configured explainer; each
    explanation is scored both ways and the pooled Spearman correlation per
    criterion pair is reported.
    """
    train, test = split(data, ratio=cfg.split_ratio,
                        seed=derive_seed(cfg.seed, "split"), stratified=True)
    model = train_forest(train, n_trees=cfg.n_trees, max_depth=cfg.max_depth,
                         seed=derive_seed(cfg.seed, "forest"))
    context = prepare_context(cfg, train)
    predict = model.predict_proba

    if n_samples > test.n_rows:
        raise ValueError(f"n_samples={n_samples} exceeds test size {test.n_rows}")
    rng = np.random.default_rng(derive_seed(cfg.seed, "instances"))
    chosen = np.sort(rng.choice(test.n_rows, size=n_samples, replace=False))

    pairs = {"complexity": ([], []), "faithfulness": ([], []),
             "sensitivity_stability": ([], [])}
    skipped = 0
    for i in chosen:
        x = test.matrix[i]
        for name in cfg.explainers:
            seed = derive_seed(cfg.seed, f"explainer:{name}", int(i))
            e = _run_explainer(name, predict, x, context, cfg, False, seed)
            e_noisy = _run_explainer(name, predict, x, context, cfg, True, seed)
            ranking = rank_features(e)
            try:
                trad_c = traditional_complexity(e)
            except ValueError:
                skipped += 1
                trad_c = None
            if trad_c is not None:
                pairs["complexity"][0].append(trad_c)
                pairs["complexity"][1].append(nrc(ranking, NrcConfig(cfg.alpha)))
            pairs["faithfulness"][0].append(
                traditional_faithfulness(predict, e, x, context.baseline))
            pairs["faithfulness"][1].append(
                rank_faithfulness(predict, ranking, x, context.baseline))
            pairs["sensitivity_stability"][0].append(traditional_sensitivity(e, e_noisy))
            pairs["sensitivity_stability"][1].append(rank_stability(e, e_noisy))

    correlations = {key: spearman(a, b) for key, (a, b) in pairs.items()}
    return {
        "criteria": list(correlations),
        "correlations": {k: float(v) for k, v in correlations.items()},
        "n_explanations": int(n_samples * len(cfg.explainers)),
        "skipped_complexity_pairs": skipped,
        "config": cfg.to_json_dict(),
    }
