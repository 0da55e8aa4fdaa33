"""Predictor contract and built-in reference models.

Any object with ``fit(dataset, labels)``, ``predict(dataset)`` and,
optionally, ``predict_proba(dataset)`` can be audited.  ``predict`` returns
one label per row; ``predict_proba`` returns a :class:`ProbabilityMatrix`
(or a plain array whose columns follow the sorted label order given by the
model's ``labels`` attribute).

The built-in models (majority, k-NN, logistic regression) keep the toolkit
usable end to end without any external framework.  Predictions made
elsewhere are ingested through :class:`PrecomputedPredictor`.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import blocks, errors
from .dataset import Dataset


@dataclass(frozen=True)
class ProbabilityMatrix:
    """Rows are distributions over ``labels`` (sorted, distinct)."""

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != len(self.labels):
            raise errors.ShapeMismatch("probability matrix shape does not match labels")
        if tuple(sorted(set(self.labels))) != tuple(self.labels):
            raise errors.DataError("probability labels must be sorted and distinct")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", tuple(self.labels))

    def column(self, label: str) -> np.ndarray:
        try:
            return self.values[:, self.labels.index(label)]
        except ValueError:
            raise errors.UnknownPositiveLabel(f"label {label!r} not in {self.labels}") from None

    def argmax_labels(self) -> np.ndarray:
        # np.argmax returns the first maximum, i.e. the smallest label on ties
        return _label_array([self.labels[i] for i in np.argmax(self.values, axis=1)])


def _label_array(values) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = list(values)
    return arr


def as_labels(labels: Sequence) -> np.ndarray:
    """Validate a label vector: non-empty ``str`` tokens."""
    arr = _label_array(list(labels))
    for v in arr:
        if not isinstance(v, str) or not v:
            raise errors.DataError(f"labels must be non-empty strings, got {v!r}")
    return arr


def _check_training(training: Dataset, labels) -> np.ndarray:
    labels = as_labels(labels)
    if training.n_rows < 1:
        raise errors.EmptyInput("no training rows")
    if len(labels) != training.n_rows:
        raise errors.LengthMismatch(
            f"{len(labels)} labels for {training.n_rows} training rows"
        )
    return labels


def _check_query(model, d: Dataset):
    if model.schema is None:
        raise errors.AnalysisError("predictor is not fitted")
    if d.schema != model.schema:
        raise errors.SchemaMismatch("query schema differs from the training schema")


def _vote_fractions(votes: np.ndarray, labels: tuple[str, ...]) -> np.ndarray:
    """Row-wise label frequencies of a (n_queries, n_votes) label array."""
    out = np.zeros((votes.shape[0], len(labels)))
    for j, lab in enumerate(labels):
        out[:, j] = np.count_nonzero(votes == lab, axis=1)
    return out / votes.shape[1]


class MajorityClassifier:
    """Always predicts the most frequent training label."""

    def __init__(self):
        self.schema = None
        self.labels: tuple[str, ...] = ()
        self.frequencies = None

    def fit(self, training: Dataset, labels) -> "MajorityClassifier":
        labels = _check_training(training, labels)
        counts = Counter(labels)
        self.schema = training.schema
        self.labels = tuple(sorted(counts))
        self.frequencies = np.array([counts[l] for l in self.labels]) / len(labels)
        return self

    @property
    def label(self) -> str:
        return self.labels[int(np.argmax(self.frequencies))]

    def predict(self, d: Dataset) -> np.ndarray:
        _check_query(self, d)
        return _label_array([self.label] * d.n_rows)

    def predict_proba(self, d: Dataset) -> ProbabilityMatrix:
        _check_query(self, d)
        return ProbabilityMatrix(self.labels, np.tile(self.frequencies, (d.n_rows, 1)))


class KNNClassifier:
    """k-nearest-neighbour vote under the mixed-type distance.

    Distance ties go to the lower training index; vote ties to the smaller
    label.
    """

    def __init__(self, k: int = 5):
        if int(k) != k or k < 1:
            raise errors.ConfigError("k must be a positive integer")
        self.k = int(k)
        self.schema = None
        self.labels: tuple[str, ...] = ()

    def fit(self, training: Dataset, labels) -> "KNNClassifier":
        labels = _check_training(training, labels)
        if self.k > training.n_rows:
            raise errors.KTooLarge(f"k={self.k} exceeds {training.n_rows} training rows")
        self.schema = training.schema
        self.training = training
        self.train_labels = labels
        self.labels = tuple(sorted(set(labels)))
        self.ranges = blocks.feature_ranges(training)
        return self

    def kneighbors(self, d: Dataset) -> np.ndarray:
        _check_query(self, d)
        dist = blocks.pairwise_distance(d, self.training, self.ranges)
        return np.argsort(dist, axis=1, kind="stable")[:, : self.k]

    def predict_proba(self, d: Dataset) -> ProbabilityMatrix:
        votes = self.train_labels[self.kneighbors(d)]
        return ProbabilityMatrix(self.labels, _vote_fractions(votes, self.labels))

    def predict(self, d: Dataset) -> np.ndarray:
        return self.predict_proba(d).argmax_labels()


def _sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticClassifier:
    """Binary logistic regression by full-batch gradient descent.

    Features are one-hot encoded and standardised with the training moments;
    weights start at zero.  ``coef_``/``intercept_`` are reported on the
    original (encoded, unstandardised) scale.  The second label in sorted
    order is the positive class of the sigmoid.
    """

    def __init__(self, epochs: int = 500, learning_rate: float = 0.5, seed: int = 0):
        if int(epochs) != epochs or epochs < 0:
            raise errors.ConfigError("epochs must be a non-negative integer")
        if not learning_rate > 0:
            raise errors.ConfigError("learning_rate must be positive")
        self.epochs = int(epochs)
        self.learning_rate = float(learning_rate)
        # zero initialisation and full batches leave nothing to randomise
        self.seed = seed
        self.schema = None
        self.labels: tuple[str, ...] = ()

    def fit(self, training: Dataset, labels) -> "LogisticClassifier":
        labels = _check_training(training, labels)
        distinct = tuple(sorted(set(labels)))
        if len(distinct) != 2:
            raise errors.NotBinary(f"logistic regression needs 2 labels, got {len(distinct)}")
        self.levels = blocks.category_levels(training)
        enc = blocks.one_hot_encode(training, self.levels)
        X = enc.matrix
        if X.shape[1] == 0:
            raise errors.NoNumericRepresentation("no encodable features")
        y = (labels == distinct[1]).astype(np.float64)
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0
        Z = (X - mu) / sd
        n = Z.shape[0]
        w = np.zeros(Z.shape[1])
        b = 0.0
        for _ in range(self.epochs):
            r = _sigmoid(Z @ w + b) - y
            w -= self.learning_rate * (Z.T @ r) / n
            b -= self.learning_rate * r.sum() / n
        self.schema = training.schema
        self.labels = distinct
        self.feature_names = enc.labels
        self.coef_ = w / sd
        self.intercept_ = float(b - (w / sd) @ mu)
        return self

    def decision_function(self, d: Dataset) -> np.ndarray:
        _check_query(self, d)
        X = blocks.one_hot_encode(d, self.levels).matrix
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, d: Dataset) -> ProbabilityMatrix:
        p1 = _sigmoid(self.decision_function(d))
        return ProbabilityMatrix(self.labels, np.column_stack([1.0 - p1, p1]))

    def predict(self, d: Dataset) -> np.ndarray:
        return self.predict_proba(d).argmax_labels()


class PrecomputedPredictor:
    """Predictions (and optional probabilities) made outside the toolkit.

    Bound to the dataset they were made for; any other dataset is rejected.
    """

    def __init__(
        self,
        dataset: Dataset,
        predictions: Sequence[str],
        probabilities: ProbabilityMatrix | None = None,
    ):
        preds = as_labels(predictions)
        if len(preds) != dataset.n_rows:
            raise errors.LengthMismatch("predictions do not cover the dataset rows")
        if probabilities is not None and probabilities.values.shape[0] != dataset.n_rows:
            raise errors.LengthMismatch("probabilities do not cover the dataset rows")
        self.dataset = dataset
        self.schema = dataset.schema
        self.predictions = preds
        self.probabilities = probabilities
        labels = set(preds)
        if probabilities is not None:
            labels |= set(probabilities.labels)
        self.labels = tuple(sorted(labels))

    @property
    def has_proba(self) -> bool:
        return self.probabilities is not None

    def fit(self, training, labels):
        raise errors.NotSupported("precomputed predictions cannot be refitted")

    def _check(self, d: Dataset):
        if d is not self.dataset and d != self.dataset:
            raise errors.NotSupported(
                "precomputed predictions only cover the dataset they were ingested with"
            )

    def predict(self, d: Dataset) -> np.ndarray:
        self._check(d)
        return self.predictions.copy()

    def predict_proba(self, d: Dataset) -> ProbabilityMatrix:
        self._check(d)
        if self.probabilities is None:
            raise errors.NotSupported("no probability columns were ingested")
        return self.probabilities


def supports_proba(p) -> bool:
    return callable(getattr(p, "predict_proba", None)) and getattr(p, "has_proba", True)


def positive_response(p, d: Dataset, positive: str) -> np.ndarray:
    """Probability of ``positive`` if available, else the 0/1 predicted indicator."""
    if supports_proba(p):
        proba = p.predict_proba(d)
        if not isinstance(proba, ProbabilityMatrix):
            proba = ProbabilityMatrix(tuple(p.labels), np.asarray(proba))
        return np.asarray(proba.column(positive), dtype=np.float64)
    known = getattr(p, "labels", None)
    if known and positive not in known:
        raise errors.UnknownPositiveLabel(f"{positive!r} is not a trained label")
    return (np.asarray(p.predict(d), dtype=object) == positive).astype(np.float64)


def majority_fit(training: Dataset, labels) -> MajorityClassifier:
    return MajorityClassifier().fit(training, labels)


def knn_fit(training: Dataset, labels, k: int = 5) -> KNNClassifier:
    return KNNClassifier(k).fit(training, labels)


def logistic_fit(
    training: Dataset, labels, epochs: int = 500, learning_rate: float = 0.5, seed: int = 0
) -> LogisticClassifier:
    return LogisticClassifier(epochs, learning_rate, seed).fit(training, labels)


MODEL_KINDS: Mapping[str, type] = {
    "majority": MajorityClassifier,
    "knn": KNNClassifier,
    "logistic": LogisticClassifier,
}
