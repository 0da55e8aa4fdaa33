"""Partial dependence, individual conditional expectation and local
surrogate explanations.

The model response is the probability of the positive label when the
predictor exposes probabilities, otherwise the 0/1 indicator of predicting
the positive label.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import blocks, errors
from .dataset import Dataset, FeatureKind, check_instance
from .predictors import positive_response

DEFAULT_RESOLUTION = 20


@dataclass(frozen=True)
class Grid:
    feature: str
    points: tuple

    def __len__(self):
        return len(self.points)


def make_grid(d: Dataset, feature: str, resolution: int = DEFAULT_RESOLUTION) -> Grid:
    """Equally spaced points over the observed [min, max] of a numeric feature,
    or each category once, sorted."""
    kind = d.schema.kind(feature)
    if kind is FeatureKind.CATEGORICAL:
        return Grid(feature, d.categories(feature))
    if int(resolution) != resolution or resolution < 1:
        raise errors.ConfigError("grid resolution must be a positive integer")
    col = d.column(feature)
    lo, hi = float(col.min()), float(col.max())
    if lo == hi:
        return Grid(feature, (lo,))
    return Grid(feature, tuple(float(v) for v in np.linspace(lo, hi, int(resolution))))


@dataclass(frozen=True)
class ICEResult:
    grid: Grid
    curves: np.ndarray  # (n_rows, n_points)
    positive: str


@dataclass(frozen=True)
class PDResult:
    grid: Grid
    curve: np.ndarray
    positive: str


def _resolve_grid(d, feature, grid):
    if grid is None:
        return make_grid(d, feature)
    if isinstance(grid, Grid):
        if grid.feature != feature:
            raise errors.ConfigError("grid was built for another feature")
        return grid
    return make_grid(d, feature, grid)


def ice(p, d: Dataset, feature: str, grid=None, positive: str | None = None) -> ICEResult:
    """Response of ``p`` on every row with ``feature`` set to each grid point.

    ``grid`` is a :class:`Grid`, a resolution, or None for the default.
    All substituted rows are scored in a single batch.
    """
    d.schema.index(feature)
    if positive is None:
        raise errors.UnknownPositiveLabel("a positive label is required")
    g = _resolve_grid(d, feature, grid)
    n, m = d.n_rows, len(g)
    column = np.repeat(np.asarray(g.points, dtype=object), n)
    if d.schema.kind(feature) is FeatureKind.NUMERIC:
        column = column.astype(np.float64)
    batch = d.repeat_rows(m).with_column(feature, column)
    resp = positive_response(p, batch, positive)
    curves = resp.reshape(m, n).T.copy()
    curves.flags.writeable = False
    return ICEResult(g, curves, positive)


def pd_from_ice(result: ICEResult) -> PDResult:
    curve = result.curves.mean(axis=0)
    curve.flags.writeable = False
    return PDResult(result.grid, curve, result.positive)


def partial_dependence(
    p, d: Dataset, feature: str, grid=None, positive: str | None = None
) -> PDResult:
    """Mean ICE curve: the average response as ``feature`` sweeps the grid."""
    return pd_from_ice(ice(p, d, feature, grid, positive))


@dataclass(frozen=True)
class SurrogateExplanation:
    anchor: tuple
    feature_names: tuple[str, ...]
    weights: tuple[float, ...]
    intercept: float
    kernel_width: float
    ridge_lambda: float
    fidelity: float | None
    constant_response: bool
    n_samples: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "anchor": list(self.anchor),
            "weights": dict(zip(self.feature_names, self.weights)),
            "intercept": self.intercept,
            "fidelity": self.fidelity,
            "constant_response": self.constant_response,
            "kernel_width": self.kernel_width,
            "ridge_lambda": self.ridge_lambda,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def weighted_r2(y, y_hat, w) -> float | None:
    """Weighted coefficient of determination; None for a constant target."""
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    mean = w @ y / w.sum()
    total = float(w @ (y - mean) ** 2)
    if total == 0.0:
        return None
    return 1.0 - float(w @ (y - np.asarray(y_hat)) ** 2) / total


def surrogate_explain(
    p,
    anchor: Sequence,
    d: Dataset,
    sampler: blocks.SamplerConfig | None = None,
    kernel_width: float = blocks.DEFAULT_KERNEL_WIDTH,
    ridge_lambda: float = blocks.DEFAULT_RIDGE_LAMBDA,
    positive: str | None = None,
) -> SurrogateExplanation:
    """Fit a proximity-weighted ridge model to ``p`` around ``anchor``.

    Samples come from :func:`blocks.gaussian_augment`, are weighted by the
    exponential kernel of their mixed distance to the anchor (ranges taken
    from ``d``), one-hot encoded with the categories of ``d`` and regressed
    on the black-box response.  Fidelity is the weighted R^2 on the same
    samples.
    """
    if positive is None:
        raise errors.UnknownPositiveLabel("a positive label is required")
    sampler = sampler or blocks.SamplerConfig()
    anchor = check_instance(d.schema, anchor)
    samples = blocks.gaussian_augment(d, anchor, sampler)
    y = positive_response(p, samples, positive)
    ranges = blocks.feature_ranges(d)
    anchor_ds = Dataset.from_rows(d.schema, [anchor])
    dist = blocks.pairwise_distance(samples, anchor_ds, ranges)[:, 0]
    w = blocks.exponential_kernel(dist, kernel_width)
    if not np.any(w > 0):
        raise errors.DegenerateWeights("every kernel weight underflowed to zero")
    enc = blocks.one_hot_encode(samples, blocks.category_levels(d))
    model = blocks.weighted_ridge_fit(enc.matrix, y, w, ridge_lambda)
    fidelity = weighted_r2(y, model.predict(enc.matrix), w)
    return SurrogateExplanation(
        anchor=anchor,
        feature_names=enc.labels,
        weights=tuple(float(v) for v in model.weights),
        intercept=float(model.intercept),
        kernel_width=float(kernel_width),
        ridge_lambda=float(ridge_lambda),
        fidelity=fidelity,
        constant_response=fidelity is None,
        n_samples=sampler.n_samples,
        seed=sampler.seed,
    )
