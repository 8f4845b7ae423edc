import csv

import numpy as np
import pytest


def german_like_rows(n=800, seed=0):
    """Credit-scoring-shaped table: 13 categorical + 7 numeric + binary label."""
    rng = np.random.default_rng(seed)
    cat_specs = [
        ("status", ["A11", "A12", "A13", "A14"]),
        ("credit_history", ["A30", "A31", "A32", "A33", "A34"]),
        ("purpose", ["A40", "A41", "A42", "A43", "A44"]),
        ("savings", ["A61", "A62", "A63", "A64", "A65"]),
        ("employment_since", ["A71", "A72", "A73", "A74", "A75"]),
        ("personal_status_sex", ["A91", "A92", "A93", "A94"]),
        ("other_debtors", ["A101", "A102", "A103"]),
        ("property", ["A121", "A122", "A123", "A124"]),
        ("other_installment_plans", ["A141", "A142", "A143"]),
        ("housing", ["A151", "A152", "A153"]),
        ("job", ["A171", "A172", "A173", "A174"]),
        ("telephone", ["A191", "A192"]),
        ("foreign_worker", ["A201", "A202"]),
    ]
    num_specs = ["duration", "credit_amount", "installment_rate",
                 "present_residence_since", "age", "existing_credits",
                 "num_dependents"]
    cats = {name: rng.choice(levels, size=n) for name, levels in cat_specs}
    nums = {
        "duration": rng.integers(4, 72, size=n).astype(float),
        "credit_amount": np.round(rng.lognormal(7.8, 0.8, size=n), 2),
        "installment_rate": rng.integers(1, 5, size=n).astype(float),
        "present_residence_since": rng.integers(1, 5, size=n).astype(float),
        "age": rng.integers(19, 75, size=n).astype(float),
        "existing_credits": rng.integers(1, 4, size=n).astype(float),
        "num_dependents": rng.integers(1, 3, size=n).astype(float),
    }
    z = (0.03 * (nums["duration"] - 20)
         + 0.4 * (np.log(nums["credit_amount"]) - 7.8)
         - 0.02 * (nums["age"] - 35)
         + 0.6 * (cats["status"] == "A11")
         + 0.5 * (cats["credit_history"] == "A30")
         - 0.4 * (cats["savings"] == "A65")
         + 0.3 * rng.normal(size=n))
    labels = (1 / (1 + np.exp(-z)) > rng.random(n)).astype(int)
    header = [name for name, _ in cat_specs] + num_specs + ["credit_risk"]
    rows = []
    for i in range(n):
        row = [str(cats[name][i]) for name, _ in cat_specs]
        row += [repr(float(nums[name][i])) for name in num_specs]
        row.append(str(labels[i]))
        rows.append(row)
    return header, rows


@pytest.fixture(scope="session")
def german_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("german") / "german_like.csv"
    header, rows = german_like_rows()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path
