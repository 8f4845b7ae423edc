import numpy as np
import pytest

from explagg.core import FeatureSchema
from explagg.ingest import Dataset


@pytest.fixture
def schema3():
    return FeatureSchema.all_numeric(["a", "b", "c"])


@pytest.fixture
def schema4():
    return FeatureSchema.all_numeric(["a", "b", "c", "d"])


def numeric_dataset(matrix, labels=None):
    matrix = np.asarray(matrix, dtype=float)
    schema = FeatureSchema.all_numeric([f"x{j}" for j in range(matrix.shape[1])])
    return Dataset(matrix, schema, labels)


class LinearModel:
    """Deterministic linear-probability stub predictor for tests."""

    def __init__(self, coefs, intercept=0.0, clip=True):
        self.coefs = np.asarray(coefs, dtype=float)
        self.intercept = intercept
        self.clip = clip
        self.schema = FeatureSchema.all_numeric(
            [f"x{j}" for j in range(self.coefs.size)])

    def predict_proba(self, rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        out = rows @ self.coefs + self.intercept
        return np.clip(out, 0.0, 1.0) if self.clip else out
