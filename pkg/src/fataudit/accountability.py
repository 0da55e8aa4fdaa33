"""Reliability signals: data density, prediction robustness and per-group
performance gaps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import blocks, errors, fairness, kernels
from .dataset import Dataset, check_instance, instance_dataset
from .predictors import as_labels

DEFAULT_K = 7
DEFAULT_ROBUSTNESS_SPREAD = 0.1


class DensityScorer:
    """k-th-nearest-neighbour distance, normalised by its maximum over the
    reference rows.

    An instance at distance exactly 0 from some reference row is treated as
    that row: one zero-distance match is discounted before taking the k-th
    neighbour.  For the reference rows themselves this is the usual
    leave-one-out neighbour distance.
    """

    def __init__(self, reference: Dataset, k: int = DEFAULT_K):
        if int(k) != k or k < 1:
            raise errors.ConfigError("k must be a positive integer")
        if k > reference.n_rows - 1:
            raise errors.KTooLarge(
                f"k={k} needs at least {k + 1} reference rows, got {reference.n_rows}"
            )
        self.reference = reference
        self.k = int(k)
        self.ranges = blocks.feature_ranges(reference)
        self.reference_distances = self._kth(reference, self.k)
        self.normalization = float(self.reference_distances.max())

    def _kth(self, d: Dataset, k: int) -> np.ndarray:
        if k > self.reference.n_rows - 1:
            raise errors.KTooLarge(f"k={k} too large for {self.reference.n_rows} rows")
        dist = blocks.pairwise_distance(d, self.reference, self.ranges)
        return kernels.kth_smallest_rows(np.ascontiguousarray(dist), int(k), True)

    def _normalise(self, raw: np.ndarray) -> np.ndarray:
        if self.normalization == 0.0:
            return np.where(raw > 0.0, 1.0, 0.0)
        return np.clip(raw / self.normalization, 0.0, 1.0)

    def kth_distance(self, instance: Sequence, k: int | None = None) -> float:
        """Unnormalised distance to the k-th neighbour (default: the scorer's k)."""
        d = instance_dataset(self.reference.schema, instance)
        return float(self._kth(d, self.k if k is None else k)[0])

    def score(self, instance: Sequence) -> float:
        return float(self.score_many(instance_dataset(self.reference.schema, instance))[0])

    def score_many(self, d: Dataset) -> np.ndarray:
        if d.schema != self.reference.schema:
            raise errors.SchemaMismatch("query schema differs from the reference schema")
        return self._normalise(self._kth(d, self.k))

    def reference_scores(self) -> np.ndarray:
        return self._normalise(self.reference_distances)


def density_fit(d: Dataset, k: int = DEFAULT_K) -> DensityScorer:
    return DensityScorer(d, k)


def density_score(scorer: DensityScorer, instance: Sequence) -> float:
    """Higher means sparser surroundings, i.e. a less trustworthy prediction."""
    return scorer.score(instance)


@dataclass(frozen=True)
class RobustnessResult:
    flip_rate: float
    n_flips: int
    n_samples: int
    seed: int
    base_prediction: str


def robustness_flip_rate(
    p, instance: Sequence, d: Dataset, cfg: blocks.SamplerConfig
) -> RobustnessResult:
    """Fraction of Gaussian perturbations of ``instance`` whose prediction
    differs from the prediction for ``instance`` itself."""
    instance = check_instance(d.schema, instance)
    base = as_labels(p.predict(instance_dataset(d.schema, instance)))[0]
    samples = blocks.gaussian_augment(d, instance, cfg)
    preds = as_labels(p.predict(samples))
    flips = int(np.count_nonzero(preds != base))
    return RobustnessResult(flips / cfg.n_samples, flips, cfg.n_samples, cfg.seed, base)


PERFORMANCE_METRICS = ("accuracy", "tpr", "fpr")


def groupwise_performance(
    p, d: Dataset, protected: str, y_true, metric: str = "accuracy", positive: str | None = None
) -> dict[str, float | None]:
    """``metric`` of ``p``'s predictions on ``d``, per protected group."""
    if metric not in PERFORMANCE_METRICS:
        raise errors.UnknownMetric(f"metric must be one of {PERFORMANCE_METRICS}")
    y_true = as_labels(y_true)
    y_pred = as_labels(p.predict(d))
    return performance_from_predictions(d, protected, y_true, y_pred, metric, positive)


def performance_from_predictions(
    d: Dataset, protected: str, y_true, y_pred, metric: str, positive: str | None = None
) -> dict[str, float | None]:
    y_true = as_labels(y_true)
    y_pred = as_labels(y_pred)
    if len(y_true) != len(y_pred):
        raise errors.LengthMismatch("labels and predictions differ in length")
    if metric == "accuracy":
        # label agreement works for any number of classes
        index = fairness._groups(d, protected, len(y_true))
        return {
            g: int(np.count_nonzero(y_true[list(r)] == y_pred[list(r)])) / len(r)
            for g, r in index.groups.items()
        }
    if metric not in PERFORMANCE_METRICS:
        raise errors.UnknownMetric(f"metric must be one of {PERFORMANCE_METRICS}")
    if positive is None:
        raise errors.ConfigError(f"metric {metric!r} needs a positive label")
    gc = fairness.grouped_confusion(d, protected, y_true, y_pred, positive)
    return {g: r[metric] for g, r in gc.rates().items()}


def performance_gap(values: Mapping[str, float | None]) -> float | None:
    defined = [v for v in values.values() if v is not None]
    if len(defined) < 2:
        return None
    return max(defined) - min(defined)
