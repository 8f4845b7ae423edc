"""CSV loading, preprocessing, and train/test splitting.

Preprocessing drops rows with missing values, one-hot encodes low-cardinality
categoricals, label-encodes the rest, and standardizes numeric columns. The
encoding manifest records every transformation so the matrix can be rebuilt
from raw data exactly. ``split`` re-standardizes numerics with statistics
from the training partition only, so test rows and perturbations never leak
into the scaler.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import CATEGORICAL, NUMERIC, FeatureSchema

MISSING_MARKERS = ("", "NA", "?")


class DataError(Exception):
    """Raised for unreadable, ragged, or degenerate input data."""


@dataclass
class RawTable:
    """Typed columns straight from a CSV: floats or category strings, None = missing."""

    columns: tuple[str, ...]
    kinds: tuple[str, ...]
    cells: list[list]  # column-major

    @property
    def n_rows(self) -> int:
        return len(self.cells[0]) if self.cells else 0


@dataclass
class Dataset:
    """Encoded numeric matrix plus its schema, labels, and encoding manifest."""

    matrix: np.ndarray
    schema: FeatureSchema
    labels: np.ndarray | None = None
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2:
            raise ValueError("matrix must be 2-D")
        if self.matrix.shape[1] != self.schema.d:
            raise ValueError("matrix width must match schema")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("matrix must not contain missing values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape[0] != self.matrix.shape[0]:
                raise ValueError("label count must match row count")

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.schema.d

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        labels = None if self.labels is None else self.labels[idx]
        return Dataset(self.matrix[idx].copy(), self.schema, labels, dict(self.manifest))


def load_csv(path) -> RawTable:
    """Read a headered CSV into typed columns.

    A column is numeric when every non-missing cell parses as a float;
    the markers "", "NA", and "?" denote missing cells.
    """
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    width = len(header)
    raw_cols: list[list] = [[] for _ in header]
    for i, row in enumerate(rows[1:]):
        if len(row) != width:
            raise DataError(f"{path}: ragged row at data row {i} "
                            f"({len(row)} fields, expected {width})")
        for j, cell in enumerate(row):
            cell = cell.strip()
            raw_cols[j].append(None if cell in MISSING_MARKERS else cell)

    kinds = []
    cells: list[list] = []
    for col in raw_cols:
        parsed = []
        numeric = True
        for cell in col:
            if cell is None:
                parsed.append(None)
                continue
            try:
                parsed.append(float(cell))
            except ValueError:
                numeric = False
                break
        if numeric:
            kinds.append(NUMERIC)
            cells.append(parsed)
        else:
            kinds.append(CATEGORICAL)
            cells.append(list(col))
    return RawTable(tuple(header), tuple(kinds), cells)


def coerce_kinds(raw: RawTable, categorical=(), numeric=()) -> RawTable:
    """Override inferred column kinds using declared column roles."""
    categorical = set(categorical)
    numeric = set(numeric)
    unknown = (categorical | numeric) - set(raw.columns)
    if unknown:
        raise DataError(f"declared columns not in table: {sorted(unknown)}")
    kinds = list(raw.kinds)
    cells = [list(col) for col in raw.cells]
    for j, name in enumerate(raw.columns):
        if name in categorical and kinds[j] == NUMERIC:
            kinds[j] = CATEGORICAL
            cells[j] = [None if v is None else str(v) for v in cells[j]]
        elif name in numeric and kinds[j] == CATEGORICAL:
            try:
                cells[j] = [None if v is None else float(v) for v in cells[j]]
            except ValueError as exc:
                raise DataError(f"column {name!r} declared numeric but does not "
                                f"parse: {exc}") from exc
            kinds[j] = NUMERIC
    return RawTable(raw.columns, tuple(kinds), cells)


def _standardize(values: np.ndarray) -> tuple[np.ndarray, float, float]:
    mean = float(values.mean())
    std = float(values.std())
    if std == 0:
        std = 1.0  # constant column maps to zeros
    return (values - mean) / std, mean, std


def preprocess(raw: RawTable, label_column: str, onehot_max: int = 10) -> Dataset:
    """Encode a raw table into a model-ready Dataset.

    Rows with any missing cell are dropped. Categorical columns with at most
    ``onehot_max`` categories become indicator columns; wider ones are
    label-encoded; numeric columns are standardized. Every step is recorded
    in the manifest.
    """
    if label_column not in raw.columns:
        raise DataError(f"label column {label_column!r} not in table")
    label_idx = raw.columns.index(label_column)

    keep = [i for i in range(raw.n_rows)
            if all(col[i] is not None for col in raw.cells)]
    dropped = raw.n_rows - len(keep)
    if not keep:
        raise DataError("no rows left after dropping missing values")

    label_cells = [raw.cells[label_idx][i] for i in keep]
    label_categories = sorted({str(v) for v in label_cells})
    labels = np.array([label_categories.index(str(v)) for v in label_cells], dtype=int)

    names: list[str] = []
    kinds: list[str] = []
    columns: list[np.ndarray] = []
    col_manifest: list[dict] = []
    for j, name in enumerate(raw.columns):
        if j == label_idx:
            continue
        col = [raw.cells[j][i] for i in keep]
        if raw.kinds[j] == NUMERIC:
            values, mean, std = _standardize(np.asarray(col, dtype=float))
            names.append(name)
            kinds.append(NUMERIC)
            columns.append(values)
            col_manifest.append({"name": name, "from": name, "kind": NUMERIC,
                                 "transform": "standardize", "mean": mean, "std": std})
        else:
            categories = sorted({str(v) for v in col})
            if len(categories) <= onehot_max:
                for cat in categories:
                    names.append(f"{name}={cat}")
                    kinds.append(CATEGORICAL)
                    columns.append(np.array([1.0 if str(v) == cat else 0.0 for v in col]))
                    col_manifest.append({"name": f"{name}={cat}", "from": name,
                                         "kind": CATEGORICAL, "transform": "onehot",
                                         "category": cat})
            else:
                codes = np.array([categories.index(str(v)) for v in col], dtype=float)
                names.append(name)
                kinds.append(CATEGORICAL)
                columns.append(codes)
                col_manifest.append({"name": name, "from": name, "kind": CATEGORICAL,
                                     "transform": "label", "categories": categories})

    manifest = {
        "label_column": label_column,
        "label_categories": label_categories,
        "onehot_max": onehot_max,
        "dropped_rows": dropped,
        "columns": col_manifest,
    }
    matrix = np.column_stack(columns)
    schema = FeatureSchema(tuple(names), tuple(kinds))
    return Dataset(matrix, schema, labels, manifest)


def apply_manifest(raw: RawTable, manifest: dict) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild (matrix, labels) from raw data using a recorded manifest."""
    label_idx = raw.columns.index(manifest["label_column"])
    keep = [i for i in range(raw.n_rows)
            if all(col[i] is not None for col in raw.cells)]
    label_categories = manifest["label_categories"]
    labels = np.array([label_categories.index(str(raw.cells[label_idx][i]))
                       for i in keep], dtype=int)
    columns = []
    for spec in manifest["columns"]:
        src = raw.cells[raw.columns.index(spec["from"])]
        col = [src[i] for i in keep]
        if spec["transform"] == "standardize":
            values = np.asarray(col, dtype=float)
            columns.append((values - spec["mean"]) / spec["std"])
        elif spec["transform"] == "onehot":
            columns.append(np.array([1.0 if str(v) == spec["category"] else 0.0
                                     for v in col]))
        else:
            cats = spec["categories"]
            columns.append(np.array([cats.index(str(v)) for v in col], dtype=float))
    return np.column_stack(columns), labels


def split(data: Dataset, ratio: float = 0.8, seed: int = 0,
          stratified: bool = True) -> tuple[Dataset, Dataset]:
    """Seeded train/test split; ``ratio`` is the train fraction.

    Stratification preserves per-class proportions to within one row per
    class. Numeric columns of both partitions are re-standardized with
    training-partition statistics and the manifests updated accordingly.
    """
    if not 0 < ratio < 1:
        raise DataError("ratio must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    n = data.n_rows
    if stratified:
        if data.labels is None:
            raise DataError("stratified split requires labels")
        train_idx: list[int] = []
        test_idx: list[int] = []
        for cls in np.unique(data.labels):
            members = np.flatnonzero(data.labels == cls)
            if members.size < 2:
                raise DataError(f"class {cls} has fewer than 2 rows; cannot stratify")
            members = members[rng.permutation(members.size)]
            n_train = int(round(ratio * members.size))
            n_train = min(max(n_train, 1), members.size - 1)
            train_idx.extend(members[:n_train])
            test_idx.extend(members[n_train:])
        train_idx = sorted(train_idx)
        test_idx = sorted(test_idx)
    else:
        perm = rng.permutation(n)
        n_train = int(round(ratio * n))
        train_idx = sorted(perm[:n_train].tolist())
        test_idx = sorted(perm[n_train:].tolist())

    train = data.take(train_idx)
    test = data.take(test_idx)
    _restandardize(train, test)
    return train, test


def _restandardize(train: Dataset, test: Dataset) -> None:
    """Re-standardize numeric columns in place using train statistics."""
    specs = train.manifest.get("columns")
    for j, kind in enumerate(train.schema.kinds):
        if kind != NUMERIC:
            continue
        spec = specs[j] if specs else None
        if spec is not None and spec.get("transform") == "standardize":
            old_mean, old_std = spec["mean"], spec["std"]
        else:
            old_mean, old_std = 0.0, 1.0
        raw_train = train.matrix[:, j] * old_std + old_mean
        raw_test = test.matrix[:, j] * old_std + old_mean
        mean = float(raw_train.mean())
        std = float(raw_train.std())
        if std == 0:
            std = 1.0
        train.matrix[:, j] = (raw_train - mean) / std
        test.matrix[:, j] = (raw_test - mean) / std
        if spec is not None:
            for ds in (train, test):
                cols = [dict(c) for c in ds.manifest["columns"]]
                cols[j]["mean"] = mean
                cols[j]["std"] = std
                ds.manifest = {**ds.manifest, "columns": cols}
