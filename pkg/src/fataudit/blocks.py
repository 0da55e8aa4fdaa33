"""Shared algorithmic building blocks.

Discretizer, one-hot encoder, Gaussian augmenter, mixed-type distance,
exponential kernel and weighted ridge regression.  The analytics modules
are assembled from these pieces; users can compose their own explainers
from them as well.

Randomness: every stochastic function takes an explicit integer seed and
draws from :func:`rng`, a Philox 4x64 counter-based generator keyed through
numpy's ``SeedSequence``.  Streams are split by appending integers to the
spawn key, so independent consumers never share state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import errors, kernels
from .dataset import Dataset, FeatureKind, Schema, check_instance

MAX_SEED = 2**64 - 1
DEFAULT_KERNEL_WIDTH = 0.25
DEFAULT_RIDGE_LAMBDA = 1.0


def rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for ``seed``, optionally on a derived substream."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise errors.ConfigError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed <= MAX_SEED:
        raise errors.ConfigError(f"seed {seed} outside [0, 2**64)")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


# -- discretizer ----------------------------------------------------------------
@dataclass(frozen=True)
class Discretizer:
    schema: Schema
    edges: Mapping[str, tuple[float, ...]]

    def n_bins(self, name: str) -> int:
        return len(self.edges[name]) + 1


def fit_quartile_discretizer(d: Dataset) -> Discretizer:
    """Quartile bin edges per numeric feature.

    Quantiles use linear interpolation at rank ``(n - 1) * p`` of the sorted
    column; repeated edges are collapsed, and a constant column gets no
    edges at all (a single bin).
    """
    if d.n_rows < 2:
        raise errors.EmptyInput("discretizer needs at least 2 rows")
    edges = {}
    for name in d.schema.numeric_names():
        col = d.column(name)
        if col.min() == col.max():
            edges[name] = ()
            continue
        qs = np.quantile(col, [0.25, 0.5, 0.75], method="linear")
        edges[name] = tuple(float(e) for e in np.unique(qs))
    return Discretizer(d.schema, edges)


def discretize(disc: Discretizer, instance: Sequence) -> tuple:
    """Bin id per numeric feature; categorical tokens pass through."""
    values = check_instance(disc.schema, instance)
    out = []
    for v, f in zip(values, disc.schema):
        if f.kind is FeatureKind.NUMERIC:
            out.append(int(np.searchsorted(disc.edges[f.name], v, side="right")))
        else:
            out.append(v)
    return tuple(out)


# -- one-hot encoding -------------------------------------------------------------
@dataclass(frozen=True)
class Encoded:
    matrix: np.ndarray
    labels: tuple[str, ...]


def category_levels(d: Dataset) -> dict[str, tuple[str, ...]]:
    return {name: d.categories(name) for name in d.schema.categorical_names()}


def one_hot_encode(
    d: Dataset, levels: Mapping[str, Sequence[str]] | None = None
) -> Encoded:
    """Numeric columns copied; categoricals expanded in sorted token order.

    ``levels`` fixes the indicator columns (e.g. to the training categories);
    tokens outside them encode as an all-zero block.
    """
    if levels is None:
        levels = category_levels(d)
    blocks, labels = [], []
    for f, col in zip(d.schema, d.columns):
        if f.kind is FeatureKind.NUMERIC:
            blocks.append(np.asarray(col, dtype=np.float64)[:, None])
            labels.append(f.name)
        else:
            toks = list(levels[f.name])
            blk = np.zeros((d.n_rows, len(toks)))
            pos = {t: i for i, t in enumerate(toks)}
            for r, t in enumerate(col):
                i = pos.get(t)
                if i is not None:
                    blk[r, i] = 1.0
            blocks.append(blk)
            labels.extend(f"{f.name}={t}" for t in toks)
    matrix = np.hstack(blocks) if blocks else np.zeros((d.n_rows, 0))
    return Encoded(matrix, tuple(labels))


# -- sampling -----------------------------------------------------------------------
@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int = 1000
    seed: int = 0
    numeric_spread: float = 1.0

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise errors.ConfigError("n_samples must be a positive integer")
        if not 0 <= self.seed <= MAX_SEED:
            raise errors.ConfigError("seed must lie in [0, 2**64)")
        if not math.isfinite(self.numeric_spread) or self.numeric_spread < 0:
            raise errors.ConfigError("numeric_spread must be finite and >= 0")


def gaussian_augment(d: Dataset, anchor: Sequence, cfg: SamplerConfig) -> Dataset:
    """Sample ``cfg.n_samples`` rows around ``anchor``.

    Numeric feature j ~ Normal(anchor_j, spread * std_j) with the population
    standard deviation of ``d``; categorical features follow the empirical
    token frequencies of ``d``.  Feature j draws from substream j.
    """
    anchor = check_instance(d.schema, anchor)
    n = cfg.n_samples
    columns = []
    for j, (f, col) in enumerate(zip(d.schema, d.columns)):
        gen = rng(cfg.seed, j)
        if f.kind is FeatureKind.NUMERIC:
            scale = cfg.numeric_spread * float(np.std(col))
            if scale == 0.0:
                columns.append(np.full(n, anchor[j]))
            else:
                columns.append(anchor[j] + scale * gen.standard_normal(n))
        else:
            tokens, counts = np.unique(col.astype(str), return_counts=True)
            cdf = np.cumsum(counts) / counts.sum()
            idx = np.searchsorted(cdf, gen.random(n) * cdf[-1], side="right")
            idx = np.minimum(idx, len(tokens) - 1)
            columns.append([str(tokens[i]) for i in idx])
    return Dataset(d.schema, columns)


# -- distance -------------------------------------------------------------------------
@dataclass(frozen=True)
class FeatureRanges:
    """Per-numeric-feature (min, max) of a reference dataset."""

    schema: Schema
    bounds: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def span(self) -> np.ndarray:
        return np.array(
            [self.bounds[n][1] - self.bounds[n][0] for n in self.schema.numeric_names()],
            dtype=np.float64,
        )


def feature_ranges(d: Dataset) -> FeatureRanges:
    return FeatureRanges(
        d.schema,
        {
            n: (float(d.column(n).min()), float(d.column(n).max()))
            for n in d.schema.numeric_names()
        },
    )


def _split_codes(a: Dataset, b: Dataset):
    schema = a.schema
    a_num = np.ascontiguousarray(
        np.column_stack([a.column(n) for n in schema.numeric_names()])
        if schema.numeric_names()
        else np.zeros((a.n_rows, 0))
    )
    b_num = np.ascontiguousarray(
        np.column_stack([b.column(n) for n in schema.numeric_names()])
        if schema.numeric_names()
        else np.zeros((b.n_rows, 0))
    )
    cats = schema.categorical_names()
    a_cat = np.zeros((a.n_rows, len(cats)), dtype=np.int64)
    b_cat = np.zeros((b.n_rows, len(cats)), dtype=np.int64)
    for j, name in enumerate(cats):
        vocab: dict[str, int] = {}
        for out, col in ((a_cat, a.column(name)), (b_cat, b.column(name))):
            out[:, j] = [vocab.setdefault(t, len(vocab)) for t in col]
    return a_num, a_cat, b_num, b_cat


def pairwise_distance(a: Dataset, b: Dataset, ranges: FeatureRanges) -> np.ndarray:
    """Matrix of :func:`mixed_distance` between every row of ``a`` and of ``b``."""
    if a.schema != ranges.schema or b.schema != ranges.schema:
        raise errors.SchemaMismatch("datasets and ranges disagree on schema")
    a_num, a_cat, b_num, b_cat = _split_codes(a, b)
    return kernels.pairwise_mixed_distance(
        a_num, a_cat, b_num, b_cat, ranges.span, len(ranges.schema)
    )


def mixed_distance(a: Sequence, b: Sequence, ranges: FeatureRanges) -> float:
    """Mean per-feature distance in [0, 1].

    Numeric: ``|a - b| / (max - min)`` clipped to 1, and 0 for a constant
    feature.  Categorical: 0 if equal else 1.
    """
    schema = ranges.schema
    da = Dataset.from_rows(schema, [check_instance(schema, a)])
    db = Dataset.from_rows(schema, [check_instance(schema, b)])
    return float(pairwise_distance(da, db, ranges)[0, 0])


def exponential_kernel(distance, width: float = DEFAULT_KERNEL_WIDTH):
    """``exp(-distance**2 / width**2)``; scalar in, float out; array in, array out."""
    if not width > 0:
        raise errors.NonPositiveWidth(f"kernel width must be positive, got {width}")
    dist = np.asarray(distance, dtype=np.float64)
    if np.any(dist < 0):
        raise errors.ConfigError("distances must be non-negative")
    w = np.exp(-(dist**2) / width**2)
    return float(w) if w.ndim == 0 else w


# -- transparent model ----------------------------------------------------------------
@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    intercept: float
    ridge_lambda: float

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercept

    def loss(self, X, y, w) -> float:
        """Weighted squared error plus the ridge penalty (intercept unpenalised)."""
        r = np.asarray(y, dtype=np.float64) - self.predict(X)
        return float(np.sum(np.asarray(w) * r**2) + self.ridge_lambda * self.weights @ self.weights)


def weighted_ridge_fit(X, y, w, lam: float = DEFAULT_RIDGE_LAMBDA) -> LinearModel:
    """Weighted ridge regression with an unpenalised intercept.

    Both sides are centred on their weighted means, then
    ``(Xc' W Xc + lam I) beta = Xc' W yc`` is solved directly.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or w.shape[0] != y.shape[0]:
        raise errors.ShapeMismatch(
            f"X {X.shape}, y {y.shape} and w {w.shape} do not agree"
        )
    if lam < 0 or not math.isfinite(lam):
        raise errors.ConfigError("ridge lambda must be finite and >= 0")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise errors.DegenerateWeights("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise errors.DegenerateWeights("all sample weights are zero")
    x_mean = w @ X / total
    y_mean = float(w @ y / total)
    Xc = X - x_mean
    yc = y - y_mean
    A = Xc.T @ (Xc * w[:, None])
    rhs = Xc.T @ (w * yc)
    p = X.shape[1]
    if lam == 0 and p and np.linalg.matrix_rank(A) < p:
        raise errors.SingularSystem("rank-deficient design with lambda = 0")
    A[np.diag_indices_from(A)] += lam
    try:
        beta = np.linalg.solve(A, rhs) if p else np.zeros(0)
    except np.linalg.LinAlgError:
        raise errors.SingularSystem("normal equations are singular") from None
    return LinearModel(beta, y_mean - float(x_mean @ beta), float(lam))
