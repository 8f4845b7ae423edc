"""Correlation and nonparametric significance machinery.

Pearson/Spearman correlations (with the shared constant-vector-to-0
convention), the Friedman rank test with its chi-square approximation, and
the Finner step-down adjustment used for the per-method significance counts
in experiment tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special


def average_ranks(values) -> np.ndarray:
    """Ascending ranks (1 = smallest) with tied values sharing the average rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(v.size, dtype=float)
    ranks[order] = np.arange(1, v.size + 1, dtype=float)
    for val in np.unique(v):
        mask = v == val
        if mask.sum() > 1:
            ranks[mask] = ranks[mask].mean()
    return ranks


def pearson(xs, ys) -> float:
    """Pearson correlation; returns 0 if either vector is constant."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    if x.size < 2:
        raise ValueError("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    denom = np.sqrt((dx * dx).sum() * (dy * dy).sum())
    if denom == 0:
        return 0.0
    return float((dx * dy).sum() / denom)


def spearman(xs, ys) -> float:
    """Spearman correlation: Pearson on average-tie ranks; constant input -> 0."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    if x.size < 2:
        raise ValueError("need at least two observations")
    return pearson(average_ranks(x), average_ranks(y))


def _chi2_sf(x: float, df: int) -> float:
    # survival function via the regularized upper incomplete gamma
    return float(special.gammaincc(df / 2.0, x / 2.0))


def _norm_sf(z: float) -> float:
    return float(1.0 - special.ndtr(z))


@dataclass
class FriedmanResult:
    chi_square: float
    p_value: float
    average_ranks: np.ndarray
    n_blocks: int
    k_methods: int


def friedman_test(values) -> FriedmanResult:
    """Friedman test over an n_blocks x k_methods table of oriented values.

    Values must already be oriented so that lower = better; each block is
    ranked ascending with average ties. chi^2 = 12n/(k(k+1)) * (sum R_j^2 -
    k(k+1)^2/4) on the per-method average ranks, compared against a
    chi-square distribution with k-1 degrees of freedom.
    """
    table = np.asarray(values, dtype=float)
    if table.ndim != 2:
        raise ValueError("expected a 2-D table (blocks x methods)")
    n, k = table.shape
    if n < 2 or k < 2:
        raise ValueError("need at least 2 blocks and 2 methods")
    block_ranks = np.vstack([average_ranks(row) for row in table])
    rbar = block_ranks.mean(axis=0)
    chi2 = 12.0 * n / (k * (k + 1)) * ((rbar ** 2).sum() - k * (k + 1) ** 2 / 4.0)
    chi2 = max(chi2, 0.0)
    return FriedmanResult(
        chi_square=float(chi2),
        p_value=_chi2_sf(chi2, k - 1),
        average_ranks=rbar,
        n_blocks=n,
        k_methods=k,
    )


def finner_posthoc(p_values) -> np.ndarray:
    """Finner step-down adjustment of per-comparison p-values.

    With m comparisons and p-values sorted ascending, the j-th adjusted
    value is max_{i <= j} (1 - (1 - p_(i))^(m/i)), clipped to [0, 1], and the
    result is mapped back to the original positions.
    """
    p = np.asarray(p_values, dtype=float)
    if p.size == 0:
        return p.copy()
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="mergesort")
    adjusted = np.empty(m, dtype=float)
    running = 0.0
    for pos, idx in enumerate(order, start=1):
        running = max(running, 1.0 - (1.0 - p[idx]) ** (m / pos))
        adjusted[idx] = min(running, 1.0)
    return adjusted


def pairwise_pvalues_vs(table, method: int) -> tuple[np.ndarray, np.ndarray]:
    """Two-sided normal p-values comparing one method's average rank to the rest.

    Returns (other_method_indices, raw_p_values) using the usual post-hoc
    statistic z = (Rbar_i - Rbar_m) / sqrt(k(k+1)/(6n)).
    """
    res = friedman_test(table)
    k, n = res.k_methods, res.n_blocks
    se = np.sqrt(k * (k + 1) / (6.0 * n))
    others = np.array([i for i in range(k) if i != method])
    z = (res.average_ranks[others] - res.average_ranks[method]) / se
    pvals = np.array([2.0 * _norm_sf(abs(zi)) for zi in z])
    return others, pvals


def count_significantly_worse(table, method: int) -> int:
    """How many methods are significantly worse than ``method``.

    ``table`` holds oriented per-block values (lower = better). The count is
    gated on the Friedman test (p < 0.05); each surviving comparison must
    have a Finner-adjusted p < 0.05 and a worse (larger) average rank.
    """
    res = friedman_test(table)
    if res.p_value >= 0.05:
        return 0
    others, pvals = pairwise_pvalues_vs(table, method)
    adjusted = finner_posthoc(pvals)
    worse = res.average_ranks[others] > res.average_ranks[method]
    return int(np.sum((adjusted < 0.05) & worse))
