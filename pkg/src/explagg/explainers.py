"""Built-in feature-importance explainers over any black-box predictor.

Three desk-scale explainers cover the usual styles: a locally weighted
linear surrogate (coefficients as scores), permutation-sampled Shapley
values with marginal substitution from background rows, and a greedy
high-precision rule search whose conditions convert to importance via
C_i = 1 - n_range_i / n. A predictor is anything mapping a batch of rows to
positive-class probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .core import CATEGORICAL, Explanation, FeatureSchema
from .ingest import Dataset


@dataclass(frozen=True)
class Predictor:
    """Read-only prediction contract: batch of rows -> P(positive class)."""

    predict_proba: object
    schema: FeatureSchema


@dataclass
class ExplainerFitState:
    """Background statistics an explainer derives from its fitting dataset."""

    schema: FeatureSchema
    means: np.ndarray
    stds: np.ndarray          # raw standard deviations (may be 0)
    dist_stds: np.ndarray     # zero stds floored to 1 for distance scaling
    category_values: dict[int, np.ndarray]  # per categorical column
    category_freqs: dict[int, np.ndarray]
    n_rows: int

    def baseline(self) -> np.ndarray:
        """Training mean for numerics, training mode for categoricals."""
        base = self.means.copy()
        for j, values in self.category_values.items():
            freqs = self.category_freqs[j]
            base[j] = values[int(np.argmax(freqs))]
        return base


def refit(data: Dataset) -> ExplainerFitState:
    """Compute fit-state statistics from the given dataset only."""
    if data.n_rows == 0:
        raise ValueError("cannot fit on an empty dataset")
    x = data.matrix
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    dist_stds = np.where(stds == 0, 1.0, stds)
    cat_values: dict[int, np.ndarray] = {}
    cat_freqs: dict[int, np.ndarray] = {}
    for j, kind in enumerate(data.schema.kinds):
        if kind == CATEGORICAL:
            values, counts = np.unique(x[:, j], return_counts=True)
            cat_values[j] = values
            cat_freqs[j] = counts / counts.sum()
    return ExplainerFitState(data.schema, means, stds, dist_stds,
                             cat_values, cat_freqs, data.n_rows)


def _weighted_lstsq(design: np.ndarray, y: np.ndarray,
                    weights: np.ndarray) -> tuple[np.ndarray, bool]:
    sw = np.sqrt(weights)
    aw = design * sw[:, None]
    yw = y * sw
    coef, _, rank, _ = np.linalg.lstsq(aw, yw, rcond=None)
    if rank < design.shape[1]:
        gram = aw.T @ aw + 1e-6 * np.eye(design.shape[1])
        return np.linalg.solve(gram, aw.T @ yw), True
    return coef, False


def lime_like_explain(predict, x, fit: ExplainerFitState, n_samples: int = 1000,
                      kernel_width: float | None = None, top_k: int | None = 10,
                      seed: int = 0) -> Explanation:
    """Locally weighted linear surrogate around x.

    Numeric features are resampled from the fit state's marginal normals,
    categoricals from their empirical frequencies; samples are weighted by
    exp(-dist^2 / kernel_width^2) on standardized distance and a weighted
    least-squares line is fit. When ``top_k`` is smaller than d, the
    surrogate is refit on the top_k largest-coefficient features and all
    others score exactly zero, mirroring the usual sparse presentation.
    Coefficients on standardized features are the scores; the surrogate's
    weighted R^2 lands in the diagnostics.
    """
    d = fit.schema.d
    if n_samples < d + 2:
        raise ValueError(f"n_samples must be at least d + 2 = {d + 2}")
    x = np.asarray(x, dtype=float)
    if kernel_width is None:
        kernel_width = 0.75 * np.sqrt(d)
    rng = np.random.default_rng(seed)

    samples = np.empty((n_samples, d))
    for j in range(d):
        if j in fit.category_values:
            samples[:, j] = rng.choice(fit.category_values[j], size=n_samples,
                                       p=fit.category_freqs[j])
        else:
            samples[:, j] = rng.normal(fit.means[j], fit.stds[j], size=n_samples)

    y = np.asarray(predict(samples), dtype=float)
    scaled = (samples - fit.means) / fit.dist_stds
    x_scaled = (x - fit.means) / fit.dist_stds
    dist2 = ((scaled - x_scaled) ** 2).sum(axis=1)
    weights = np.exp(-dist2 / kernel_width ** 2)

    design = np.column_stack([np.ones(n_samples), scaled])
    coef, ridge_fallback = _weighted_lstsq(design, y, weights)

    scores = coef[1:]
    if top_k is not None and top_k < d:
        keep = np.sort(np.argsort(-np.abs(scores), kind="stable")[:top_k])
        sub_design = np.column_stack([np.ones(n_samples), scaled[:, keep]])
        sub_coef, sub_ridge = _weighted_lstsq(sub_design, y, weights)
        ridge_fallback = ridge_fallback or sub_ridge
        coef = np.zeros(d + 1)
        coef[0] = sub_coef[0]
        coef[keep + 1] = sub_coef[1:]
        scores = coef[1:]
        design = np.column_stack([np.ones(n_samples), scaled])

    fitted = design @ coef
    ss_res = float((weights * (y - fitted) ** 2).sum())
    y_mean = float((weights * y).sum() / weights.sum())
    ss_tot = float((weights * (y - y_mean) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot

    return Explanation(fit.schema, scores, source="lime",
                       diagnostics={"r2": r2, "ridge_fallback": bool(ridge_fallback)})


def _subsample_background(background: np.ndarray, max_rows: int = 100) -> np.ndarray:
    if background.shape[0] <= max_rows:
        return background
    idx = np.linspace(0, background.shape[0] - 1, max_rows).astype(int)
    return background[idx]


def shapley_sample_explain(predict, x, background, n_permutations: int = 64,
                           seed: int = 0) -> Explanation:
    """Permutation-sampled Shapley attributions.

    Each permutation draws one background row and walks the features in
    random order, switching them from the background value to x's value and
    crediting the prediction change. The efficiency residual
    |sum(phi) - (f(x) - mean_b f(b))| and per-feature standard errors are
    reported in the diagnostics.
    """
    bg = background.matrix if isinstance(background, Dataset) else np.asarray(background, float)
    schema = background.schema if isinstance(background, Dataset) else FeatureSchema.all_numeric(
        [f"x{i}" for i in range(bg.shape[1])])
    if bg.shape[0] == 0:
        raise ValueError("background must be nonempty")
    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    x = np.asarray(x, dtype=float)
    d = x.size
    rng = np.random.default_rng(seed)

    contribs = np.zeros((n_permutations, d))
    for t in range(n_permutations):
        b = bg[rng.integers(bg.shape[0])]
        perm = rng.permutation(d)
        batch = np.empty((d + 1, d))
        cur = b.copy()
        batch[0] = cur
        for k, j in enumerate(perm):
            cur[j] = x[j]
            batch[k + 1] = cur
        preds = np.asarray(predict(batch), dtype=float)
        contribs[t, perm] = np.diff(preds)

    phi = contribs.mean(axis=0)
    if n_permutations > 1:
        stderr = contribs.std(axis=0, ddof=1) / np.sqrt(n_permutations)
    else:
        stderr = np.full(d, np.nan)
    f_x = float(np.asarray(predict(x[None, :]))[0])
    f_bg = float(np.asarray(predict(bg)).mean())
    residual = abs(float(phi.sum()) - (f_x - f_bg))

    return Explanation(schema, phi, source="shap",
                       diagnostics={"efficiency_residual": residual,
                                    "stderr": stderr.tolist()})


def shapley_exact(predict, x, background) -> np.ndarray:
    """Exhaustive Shapley values over all feature coalitions (small d only).

    The coalition value is the mean prediction with coalition features taken
    from x and the rest from each background row in turn.
    """
    bg = background.matrix if isinstance(background, Dataset) else np.asarray(background, float)
    x = np.asarray(x, dtype=float)
    d = x.size
    if d > 16:
        raise ValueError("exhaustive enumeration is limited to d <= 16")
    n_bg = bg.shape[0]

    values = np.empty(2 ** d)
    for mask in range(2 ** d):
        rows = bg.copy()
        for j in range(d):
            if mask >> j & 1:
                rows[:, j] = x[j]
        values[mask] = float(np.asarray(predict(rows)).mean())

    phi = np.zeros(d)
    size_weight = [factorial(s) * factorial(d - s - 1) / factorial(d) for s in range(d)]
    for mask in range(2 ** d):
        s = bin(mask).count("1")
        for j in range(d):
            if not mask >> j & 1:
                phi[j] += size_weight[s] * (values[mask | (1 << j)] - values[mask])
    return phi


@dataclass
class AnchorRule:
    """Per-feature conditions plus their precision and coverage counts."""

    conditions: dict[int, tuple]  # j -> ("interval", lo, hi) | ("equal", value)
    precision_estimate: float
    coverage_counts: dict[int, int] = field(default_factory=dict)
    flagged: bool = False

    def __post_init__(self):
        if not 0.0 <= self.precision_estimate <= 1.0:
            raise ValueError("precision must lie in [0, 1]")

    def satisfies(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(rows)
        mask = np.ones(rows.shape[0], dtype=bool)
        for j, cond in self.conditions.items():
            if cond[0] == "interval":
                mask &= (rows[:, j] >= cond[1]) & (rows[:, j] <= cond[2])
            else:
                mask &= rows[:, j] == cond[1]
        return mask


def _feature_condition(data: Dataset, j: int, x_j: float) -> tuple:
    if data.schema.kinds[j] == CATEGORICAL:
        return ("equal", float(x_j))
    col = data.matrix[:, j]
    edges = np.quantile(col, np.linspace(0, 1, 11))
    idx = int(np.searchsorted(edges[1:-1], x_j, side="right"))
    return ("interval", float(edges[idx]), float(edges[idx + 1]))


def anchor_importance(sat_counts: dict[int, int], n: int, d: int) -> np.ndarray:
    """Convert per-condition coverage counts into scores C_i = 1 - n_range_i/n."""
    scores = np.zeros(d)
    for j, count in sat_counts.items():
        scores[j] = 1.0 - count / n
    return scores


def anchor_like_explain(predict, x, data: Dataset, epsilon: float = 0.05,
                        seed: int = 0) -> tuple[AnchorRule, Explanation]:
    """Greedy rule search reaching precision 1 - epsilon, converted to scores.

    Candidate conditions are the decile bin containing x for numeric
    features and exact equality for categoricals. Precision is the fraction
    of dataset rows satisfying the rule that share x's predicted class
    (vacuously 1 on empty support). Conditioned features score
    C_i = 1 - n_range_i/n, the rest 0.
    """
    if data.n_rows == 0:
        raise ValueError("anchor search needs a nonempty dataset")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    d = data.schema.d
    n = data.n_rows

    row_cls = np.asarray(predict(data.matrix)) >= 0.5
    target = bool(np.asarray(predict(x[None, :]))[0] >= 0.5)
    agree = row_cls == target

    conditions = {j: _feature_condition(data, j, x[j]) for j in range(d)}
    sat = {}
    for j, cond in conditions.items():
        if cond[0] == "interval":
            sat[j] = (data.matrix[:, j] >= cond[1]) & (data.matrix[:, j] <= cond[2])
        else:
            sat[j] = data.matrix[:, j] == cond[1]

    def precision(mask: np.ndarray) -> float:
        support = int(mask.sum())
        if support == 0:
            return 1.0
        return float(agree[mask].mean())

    selected: list[int] = []
    mask = np.ones(n, dtype=bool)
    prec = precision(mask)
    while prec < 1.0 - epsilon and len(selected) < d:
        best_j, best_p = -1, -1.0
        for j in range(d):
            if j in selected:
                continue
            p = precision(mask & sat[j])
            if p > best_p:
                best_j, best_p = j, p
        selected.append(best_j)
        mask &= sat[best_j]
        prec = best_p
    flagged = prec < 1.0 - epsilon

    coverage = {j: int(sat[j].sum()) for j in selected}
    rule = AnchorRule({j: conditions[j] for j in selected}, prec, coverage, flagged)
    scores = anchor_importance(coverage, n, d)
    expl = Explanation(data.schema, scores, source="anchor",
                       diagnostics={"precision": prec, "flagged": flagged,
                                    "n_conditions": len(selected)})
    return rule, expl
