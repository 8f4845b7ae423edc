"""Synthetic tabular classification data for demos, tests, and benchmarks.

Generators return (header, rows) pairs that round-trip through the CSV
loader, plus helpers to materialize them as files or ready Datasets.
"""

from __future__ import annotations

import csv

import numpy as np

from .ingest import Dataset, RawTable, preprocess
from .core import CATEGORICAL, NUMERIC


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def linear_rows(n: int = 400, d: int = 5, seed: int = 0):
    """Numeric features with a linear decision signal of decaying strength."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    coefs = np.array([1.5 * 0.6 ** j for j in range(d)])
    prob = _sigmoid(x @ coefs + 0.3 * rng.normal(size=n))
    y = (rng.random(n) < prob).astype(int)
    header = [f"x{j + 1}" for j in range(d)] + ["label"]
    rows = [[f"{v:.6f}" for v in x[i]] + [str(y[i])] for i in range(n)]
    return header, rows


def nonlinear_rows(n: int = 1000, d: int = 8, seed: int = 0):
    """Planted nonlinear signal: interaction, sine, and quadratic terms.

    Only the first five features carry signal; the rest are noise.
    """
    if d < 5:
        raise ValueError("need at least 5 features")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    z = (1.5 * x[:, 0] + 1.2 * x[:, 1] * x[:, 2]
         + 1.0 * np.sin(2.0 * x[:, 3]) + 0.8 * x[:, 4] ** 2 - 0.8)
    y = (rng.random(n) < _sigmoid(2.0 * z)).astype(int)
    header = [f"x{j + 1}" for j in range(d)] + ["label"]
    rows = [[f"{v:.6f}" for v in x[i]] + [str(y[i])] for i in range(n)]
    return header, rows


def wdbc_like_rows(n: int = 569, seed: int = 0):
    """Breast-cancer-shaped data: 28 correlated numerics plus 2 categoricals.

    Numeric features come in correlated blocks whose means shift with the
    class; the categorical columns are weakly class-dependent.
    """
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.37).astype(int)
    d_num = 28
    base = rng.normal(size=(n, 7))
    x = np.empty((n, d_num))
    shifts = rng.uniform(0.6, 1.6, size=d_num)
    for j in range(d_num):
        block = base[:, j % 7]
        x[:, j] = (0.7 * block + 0.7 * rng.normal(size=n)) + shifts[j] * y
    sites = np.array(["clinic_a", "clinic_b", "clinic_c"])
    grades = np.array(["g1", "g2", "g3", "g4"])
    site_p = np.where(y[:, None] == 1, [0.2, 0.3, 0.5], [0.5, 0.3, 0.2])
    site = np.array([rng.choice(sites, p=p) for p in site_p])
    grade_p = np.where(y[:, None] == 1, [0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1])
    grade = np.array([rng.choice(grades, p=p) for p in grade_p])
    header = [f"v{j + 1:02d}" for j in range(d_num)] + ["site", "grade", "label"]
    rows = [[f"{v:.6f}" for v in x[i]] + [site[i], grade[i], str(y[i])]
            for i in range(n)]
    return header, rows


def rows_to_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def rows_to_raw(header, rows, categorical: tuple[str, ...] = ()) -> RawTable:
    """Build a typed RawTable directly, marking the named columns categorical."""
    cells: list[list] = []
    kinds: list[str] = []
    for j, name in enumerate(header):
        col = [row[j] for row in rows]
        if name in categorical:
            kinds.append(CATEGORICAL)
            cells.append([str(v) for v in col])
        else:
            try:
                cells.append([float(v) for v in col])
                kinds.append(NUMERIC)
            except ValueError:
                kinds.append(CATEGORICAL)
                cells.append([str(v) for v in col])
    return RawTable(tuple(header), tuple(kinds), cells)


def make_dataset(header, rows, label: str = "label",
                 categorical: tuple[str, ...] = (), onehot_max: int = 10) -> Dataset:
    raw = rows_to_raw(header, rows, categorical)
    return preprocess(raw, label, onehot_max=onehot_max)
