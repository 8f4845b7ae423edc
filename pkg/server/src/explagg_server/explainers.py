"""Scikit-learn-backed tabular explainers served over the bridge protocol.

Three explainer families: a ridge-regression local surrogate weighted by an
exponential locality kernel (sparse top-k presentation), antithetic
permutation sampling of Shapley-style attributions, and a greedy
high-precision rule search whose conditions convert to importance scores
via C_i = 1 - n_range_i / n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.linear_model import Ridge


@dataclass
class FitState:
    """Statistics and rows of the dataset an explainer was fit to."""

    columns: list[str]
    kinds: list[str]
    matrix: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    pools: dict[int, tuple[np.ndarray, np.ndarray]]  # categorical value/freq

    @classmethod
    def from_payload(cls, payload: dict) -> "FitState":
        matrix = np.asarray(payload["matrix"], dtype=float)
        kinds = list(payload["kinds"])
        means = matrix.mean(axis=0)
        stds = matrix.std(axis=0)
        pools = {}
        for j, kind in enumerate(kinds):
            if kind == "categorical":
                values, counts = np.unique(matrix[:, j], return_counts=True)
                pools[j] = (values, counts / counts.sum())
        return cls(list(payload["columns"]), kinds, matrix, means, stds, pools)

    @property
    def d(self) -> int:
        return self.matrix.shape[1]


def lime_explain(predict, x, fit: FitState, rng: np.random.Generator,
                 n_samples: int = 1000, top_k: int = 10,
                 ridge_alpha: float = 1.0) -> dict:
    """Ridge-fit local surrogate; coefficients on standardized features."""
    d = fit.d
    x = np.asarray(x, dtype=float)
    safe_stds = np.where(fit.stds == 0, 1.0, fit.stds)

    samples = np.empty((n_samples, d))
    for j in range(d):
        if j in fit.pools:
            values, freqs = fit.pools[j]
            samples[:, j] = rng.choice(values, size=n_samples, p=freqs)
        else:
            samples[:, j] = rng.normal(fit.means[j], fit.stds[j], size=n_samples)

    y = np.asarray(predict(samples), dtype=float)
    scaled = (samples - fit.means) / safe_stds
    x_scaled = (x - fit.means) / safe_stds
    kernel_width = 0.75 * np.sqrt(d)
    weights = np.exp(-((scaled - x_scaled) ** 2).sum(axis=1) / kernel_width ** 2)

    model = Ridge(alpha=ridge_alpha)
    model.fit(scaled, y, sample_weight=weights)
    coefs = model.coef_

    if top_k < d:
        keep = np.sort(np.argsort(-np.abs(coefs), kind="stable")[:top_k])
        sparse_model = Ridge(alpha=ridge_alpha)
        sparse_model.fit(scaled[:, keep], y, sample_weight=weights)
        coefs = np.zeros(d)
        coefs[keep] = sparse_model.coef_
        score = sparse_model.score(scaled[:, keep], y, sample_weight=weights)
    else:
        score = model.score(scaled, y, sample_weight=weights)

    return {"scores": coefs.tolist(), "diagnostics": {"r2": float(score)}}


def shap_explain(predict, x, fit: FitState, rng: np.random.Generator,
                 n_permutations: int = 50, background_rows: int = 64) -> dict:
    """Antithetic permutation sampling of per-feature attributions.

    Each draw evaluates one random feature order and its reverse against a
    sampled background row, crediting marginal prediction changes.
    """
    d = fit.d
    x = np.asarray(x, dtype=float)
    n_bg = min(background_rows, fit.matrix.shape[0])
    bg_idx = rng.choice(fit.matrix.shape[0], size=n_bg, replace=False)
    background = fit.matrix[bg_idx]

    contribs = np.zeros(d)
    half = max(1, n_permutations // 2)
    total = 0
    for _ in range(half):
        base = background[rng.integers(n_bg)]
        order = rng.permutation(d)
        for perm in (order, order[::-1]):
            walk = np.tile(base, (d + 1, 1))
            for pos, j in enumerate(perm):
                walk[pos + 1:, j] = x[j]
            preds = np.asarray(predict(walk), dtype=float)
            contribs[perm] += np.diff(preds)
            total += 1
    phi = contribs / total

    f_x = float(np.asarray(predict(x[None, :]))[0])
    f_bg = float(np.asarray(predict(background)).mean())
    return {"scores": phi.tolist(),
            "diagnostics": {"efficiency_residual": abs(float(phi.sum()) - (f_x - f_bg)),
                            "n_evaluations": total * (d + 1)}}


def anchor_explain(predict, x, fit: FitState, rng: np.random.Generator,
                   epsilon: float = 0.05, n_bins: int = 4) -> dict:
    """Greedy precision-first rule search with coverage-based importance.

    Numeric candidates are the quantile bin of the fitted rows containing x;
    categorical candidates are exact equality. The reported score for a
    conditioned feature i is C_i = 1 - n_range_i / n.
    """
    x = np.asarray(x, dtype=float)
    d = fit.d
    n = fit.matrix.shape[0]
    target = bool(np.asarray(predict(x[None, :]))[0] >= 0.5)
    agree = (np.asarray(predict(fit.matrix)) >= 0.5) == target

    conditions: dict[int, dict] = {}
    satisfied: dict[int, np.ndarray] = {}
    for j in range(d):
        col = fit.matrix[:, j]
        if j in fit.pools:
            conditions[j] = {"kind": "equal", "value": float(x[j])}
            satisfied[j] = col == x[j]
        else:
            edges = np.quantile(col, np.linspace(0, 1, n_bins + 1))
            idx = int(np.searchsorted(edges[1:-1], x[j], side="right"))
            lo, hi = float(edges[idx]), float(edges[idx + 1])
            conditions[j] = {"kind": "interval", "lo": lo, "hi": hi}
            satisfied[j] = (col >= lo) & (col <= hi)

    def precision(mask):
        return float(agree[mask].mean()) if mask.any() else 1.0

    chosen: list[int] = []
    mask = np.ones(n, dtype=bool)
    prec = precision(mask)
    while prec < 1.0 - epsilon and len(chosen) < d:
        best_j, best_p = -1, -1.0
        for j in range(d):
            if j in chosen:
                continue
            p = precision(mask & satisfied[j])
            if p > best_p:
                best_j, best_p = j, p
        chosen.append(best_j)
        mask &= satisfied[best_j]
        prec = best_p

    scores = np.zeros(d)
    rule = []
    for j in chosen:
        n_range = int(satisfied[j].sum())
        scores[j] = 1.0 - n_range / n
        rule.append({"feature": j, "name": fit.columns[j],
                     "n_range": n_range, **conditions[j]})
    return {"scores": scores.tolist(),
            "diagnostics": {"precision": prec, "rule": rule, "n_total": n,
                            "flagged": prec < 1.0 - epsilon}}
