"""Group fairness metrics over predictions and bias checks over data.

All metrics are binary: a multi-class problem is reduced to one-vs-rest
through the chosen positive label.  A rate whose denominator is zero is
``None`` (undefined) and any pairwise comparison involving it is
indeterminate (``None``) rather than a violation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import errors
from .dataset import Dataset, GroupIndex, group_by_feature
from .predictors import as_labels

DEFAULT_TOLERANCE = 0.2
FOUR_FIFTHS = Fraction(4, 5)

RATE_NAMES = ("tpr", "fpr", "ppv", "accuracy", "positive_rate")
METRIC_ALIASES = {
    "equal_opportunity": "tpr",
    "demographic_parity": "positive_rate",
    "predictive_parity": "ppv",
    "accuracy_equality": "accuracy",
}
EQUALIZED_ODDS = "equalized_odds"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int
    positive_label: str

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.positive_label != other.positive_label:
            raise errors.DataError("cannot add matrices with different positive labels")
        return ConfusionMatrix(
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn + other.fn,
            self.positive_label,
        )

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def _check_pair(y_true, y_pred, positive):
    y_true = as_labels(y_true)
    y_pred = as_labels(y_pred)
    if len(y_true) != len(y_pred):
        raise errors.LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if len(y_true) == 0:
        raise errors.EmptyInput("no labels")
    distinct = set(y_true) | set(y_pred)
    if len(distinct) > 2:
        raise errors.NotBinary(
            f"binary metrics need at most 2 labels, got {sorted(distinct)}; "
            "map to one-vs-rest first"
        )
    if len(distinct) == 2 and positive not in distinct:
        raise errors.UnknownPositiveLabel(f"positive label {positive!r} not in {sorted(distinct)}")
    return y_true, y_pred


def _count(t: np.ndarray, p: np.ndarray, positive: str) -> ConfusionMatrix:
    tpos = t == positive
    ppos = p == positive
    return ConfusionMatrix(
        tp=int(np.count_nonzero(tpos & ppos)),
        fp=int(np.count_nonzero(~tpos & ppos)),
        tn=int(np.count_nonzero(~tpos & ~ppos)),
        fn=int(np.count_nonzero(tpos & ~ppos)),
        positive_label=positive,
    )


def confusion_matrix(y_true: Sequence[str], y_pred: Sequence[str], positive: str) -> ConfusionMatrix:
    y_true, y_pred = _check_pair(y_true, y_pred, positive)
    return _count(y_true, y_pred, positive)


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def rates(cm: ConfusionMatrix) -> dict[str, float | None]:
    """tpr, fpr, ppv, accuracy and positive_rate; ``None`` when undefined."""
    return {
        "tpr": _ratio(cm.tp, cm.tp + cm.fn),
        "fpr": _ratio(cm.fp, cm.fp + cm.tn),
        "ppv": _ratio(cm.tp, cm.tp + cm.fp),
        "accuracy": _ratio(cm.tp + cm.tn, cm.n),
        "positive_rate": _ratio(cm.tp + cm.fp, cm.n),
    }


@dataclass(frozen=True)
class GroupedConfusion:
    grouping_feature: str
    matrices: Mapping[str, ConfusionMatrix]

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(self.matrices)

    def pooled(self) -> ConfusionMatrix:
        it = iter(self.matrices.values())
        total = next(it)
        for cm in it:
            total = total + cm
        return total

    def rates(self) -> dict[str, dict[str, float | None]]:
        return {g: rates(cm) for g, cm in self.matrices.items()}


def _groups(d: Dataset, protected: str, n: int) -> GroupIndex:
    if d.n_rows != n:
        raise errors.LengthMismatch(f"{n} labels for a dataset of {d.n_rows} rows")
    return group_by_feature(d, protected)


def grouped_confusion(
    d: Dataset, protected: str, y_true, y_pred, positive: str
) -> GroupedConfusion:
    y_true, y_pred = _check_pair(y_true, y_pred, positive)
    index = _groups(d, protected, len(y_true))
    return GroupedConfusion(
        protected,
        {
            g: _count(y_true[list(rows)], y_pred[list(rows)], positive)
            for g, rows in index.groups.items()
        },
    )


@dataclass(frozen=True)
class DisparityReport:
    """Per-group metric values and the pairwise violation grid.

    ``violations[i][j]`` compares ``groups[i]`` with ``groups[j]``: True if
    the gap exceeds ``tolerance``, False if not, None if either value is
    undefined.
    """

    metric: str
    groups: tuple[str, ...]
    values: Mapping[str, object]
    violations: tuple[tuple[bool | None, ...], ...]
    tolerance: float
    undefined_groups: tuple[str, ...] = ()

    def violating_pairs(self) -> list[tuple[str, str]]:
        return [
            (self.groups[i], self.groups[j])
            for i, j in itertools.combinations(range(len(self.groups)), 2)
            if self.violations[i][j] is True
        ]

    def indeterminate_pairs(self) -> list[tuple[str, str]]:
        return [
            (self.groups[i], self.groups[j])
            for i, j in itertools.combinations(range(len(self.groups)), 2)
            if self.violations[i][j] is None
        ]


def resolve_metric(metric: str) -> str:
    name = METRIC_ALIASES.get(metric, metric)
    if name not in RATE_NAMES and name != EQUALIZED_ODDS:
        raise errors.UnknownMetric(
            f"unknown metric {metric!r}; choose from "
            f"{sorted(RATE_NAMES + (EQUALIZED_ODDS,) + tuple(METRIC_ALIASES))}"
        )
    return name


def _grid(values: Sequence[float | None], tolerance: float):
    n = len(values)
    grid = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(False)
            elif values[i] is None or values[j] is None:
                row.append(None)
            else:
                row.append(abs(values[i] - values[j]) > tolerance)
        grid.append(tuple(row))
    return tuple(grid)


def _either(a: bool | None, b: bool | None) -> bool | None:
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


def disparity_from_rates(
    group_rates: Mapping[str, Mapping[str, float | None]], metric: str, tolerance: float
) -> DisparityReport:
    metric = resolve_metric(metric)
    if not tolerance >= 0:
        raise errors.ConfigError("tolerance must be >= 0")
    groups = tuple(group_rates)
    if metric == EQUALIZED_ODDS:
        tpr = _grid([group_rates[g]["tpr"] for g in groups], tolerance)
        fpr = _grid([group_rates[g]["fpr"] for g in groups], tolerance)
        grid = tuple(
            tuple(_either(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(tpr, fpr)
        )
        values = {g: {"tpr": group_rates[g]["tpr"], "fpr": group_rates[g]["fpr"]} for g in groups}
        undefined = tuple(
            g for g in groups if group_rates[g]["tpr"] is None or group_rates[g]["fpr"] is None
        )
    else:
        vals = [group_rates[g][metric] for g in groups]
        grid = _grid(vals, tolerance)
        values = dict(zip(groups, vals))
        undefined = tuple(g for g, v in values.items() if v is None)
    return DisparityReport(metric, groups, values, grid, float(tolerance), undefined)


def groupwise_disparity(
    d: Dataset,
    protected: str,
    y_true,
    y_pred,
    metric: str,
    tolerance: float = DEFAULT_TOLERANCE,
    positive: str | None = None,
) -> DisparityReport:
    """Compare ``metric`` across the groups of ``protected``.

    ``positive`` defaults to the larger of the two labels in sorted order.
    """
    metric = resolve_metric(metric)
    if positive is None:
        positive = max(set(as_labels(y_true)) | set(as_labels(y_pred)))
    gc = grouped_confusion(d, protected, y_true, y_pred, positive)
    return disparity_from_rates(gc.rates(), metric, tolerance)


@dataclass(frozen=True)
class DisparateImpact:
    ratio: float
    passed: bool
    positive_rates: Mapping[str, float]
    min_group: str
    max_group: str


def disparate_impact(d: Dataset, protected: str, y_pred, positive: str) -> DisparateImpact:
    """Four-fifths rule: min/max ratio of group positive-prediction rates.

    The ratio is computed in exact rational arithmetic, so the 0.8 boundary
    is inclusive without rounding surprises.
    """
    y_pred = as_labels(y_pred)
    index = _groups(d, protected, len(y_pred))
    if len(index) < 2:
        raise errors.SingleGroup("disparate impact needs at least 2 groups")
    exact = {
        g: Fraction(int(np.count_nonzero(y_pred[list(rows)] == positive)), len(rows))
        for g, rows in index.groups.items()
    }
    # first group wins ties, in sorted group order
    lo = min(exact, key=lambda g: exact[g])
    hi = max(exact, key=lambda g: exact[g])
    ratio = Fraction(1) if exact[hi] == 0 else exact[lo] / exact[hi]
    return DisparateImpact(
        ratio=float(ratio),
        passed=ratio >= FOUR_FIFTHS,
        positive_rates={g: float(r) for g, r in exact.items()},
        min_group=lo,
        max_group=hi,
    )


@dataclass(frozen=True)
class DataBiasSummary:
    group_sizes: Mapping[str, int]
    label_distribution: Mapping[str, Mapping[str, float]]
    max_gap: float
    worst: tuple[str, str, str] | None  # (label, group, group)


def data_bias_summary(d: Dataset, protected: str, labels) -> DataBiasSummary:
    """Group sizes, per-group label frequencies and their largest pairwise gap."""
    labels = as_labels(labels)
    index = _groups(d, protected, len(labels))
    label_set = sorted(set(labels))
    dist = {}
    for g, rows in index.groups.items():
        sub = labels[list(rows)]
        dist[g] = {l: int(np.count_nonzero(sub == l)) / len(rows) for l in label_set}
    gap, worst = 0.0, None
    for l in label_set:
        for g, h in itertools.combinations(index.groups, 2):
            diff = abs(dist[g][l] - dist[h][l])
            if diff > gap:
                gap, worst = diff, (l, g, h)
    return DataBiasSummary(
        {g: len(rows) for g, rows in index.groups.items()}, dist, gap, worst
    )


def systemic_bias_pairs(d: Dataset, protected: str, labels) -> list[tuple[int, int]]:
    """Row pairs identical on every non-protected feature that differ in both
    the protected token and the label, sorted lexicographically."""
    labels = as_labels(labels)
    _groups(d, protected, len(labels))
    j = d.schema.index(protected)
    others = [c for k, c in enumerate(d.columns) if k != j]
    prot = d.columns[j]
    buckets: dict[tuple, list[int]] = {}
    for i in range(d.n_rows):
        key = tuple(c[i] for c in others)
        buckets.setdefault(key, []).append(i)
    pairs = []
    for rows in buckets.values():
        for a, b in itertools.combinations(rows, 2):
            if prot[a] != prot[b] and labels[a] != labels[b]:
                pairs.append((a, b))
    pairs.sort()
    return pairs
