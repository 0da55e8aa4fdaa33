import numpy as np

from fataudit.dataset import Dataset
from fataudit.predictors import ProbabilityMatrix


def make_dataset(columns: dict, kinds: dict | None = None) -> Dataset:
    return Dataset.from_dict(columns, kinds)


class FunctionPredictor:
    """Wraps ``f(row) -> label`` (and optionally ``g(row) -> P(positive)``)."""

    def __init__(self, schema, label_fn, labels, proba_fn=None, positive=None):
        self.schema = schema
        self.label_fn = label_fn
        self.labels = tuple(sorted(labels))
        self.proba_fn = proba_fn
        self.positive = positive
        self.has_proba = proba_fn is not None

    def fit(self, d, labels):
        return self

    def predict(self, d):
        out = np.empty(d.n_rows, dtype=object)
        out[:] = [self.label_fn(r) for r in d.rows()]
        return out

    def predict_proba(self, d):
        p = np.array([self.proba_fn(r) for r in d.rows()])
        if self.labels.index(self.positive) == 1:
            vals = np.column_stack([1 - p, p])
        else:
            vals = np.column_stack([p, 1 - p])
        return ProbabilityMatrix(self.labels, vals)


BASE_CONFIG = """\
seed = {seed}
data = "data.csv"
labels_column = "label"
protected = "group"
positive = "yes"
"""


def write_project(root, rows, sections, seed=7, header=("x1", "x2", "group", "label", "pred")):
    """Write ``data.csv`` and ``audit.toml`` under ``root``; returns the config path."""
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    (root / "data.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    path = root / "audit.toml"
    path.write_text(BASE_CONFIG.format(seed=seed) + sections, encoding="utf-8")
    return path


def di_rows():
    """Group A predicted positive at rate 0.5, group B at 0.25 (20 rows each)."""
    rows = []
    for g, n_pos in (("A", 10), ("B", 5)):
        for i in range(20):
            pred = "yes" if i < n_pos else "no"
            label = "yes" if i % 2 == 0 else "no"
            rows.append((float(i), float(i % 3), g, label, pred))
    return rows


def fair_rows():
    """Both groups share identical feature, label and prediction rows."""
    rows = []
    for g in ("A", "B"):
        for i in range(12):
            label = "yes" if i % 3 else "no"
            pred = label if i != 5 else "yes"
            rows.append((float(i), float(i % 4), g, label, pred))
    return rows


def model_rows(n=80, seed=3):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        x1, x2 = rng.normal(), rng.uniform(0, 5)
        g = "A" if rng.random() < 0.5 else "B"
        label = "yes" if x1 + 0.4 * rng.normal() > 0 else "no"
        rows.append((round(x1, 4), round(x2, 4), g, label, label))
    return rows


PRECOMPUTED = """
[predictions]
column = "pred"
[fairness]
"""

MODEL_FULL = """\
features = ["x1", "x2", "group"]
[predictions]
model = "{kind}"
{params}
[fairness]
[accountability]
k = 5
robustness_rows = [0, 3]
n_samples = 200
[transparency]
pd_features = ["x1", "group"]
ice_features = ["x2"]
surrogate_rows = [1]
resolution = 6
n_samples = 300
"""
