"""Audit configuration: a TOML document validated into frozen dataclasses.

Minimal example::

    seed = 42
    data = "loans.csv"
    labels_column = "approved"
    protected = "sex"
    positive = "yes"

    [predictions]
    column = "model_decision"

    [fairness]
    metrics = ["positive_rate", "tpr", "equalized_odds"]

Relative paths are resolved against the directory of the config file.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from . import errors
from ._toml import load_toml_text
from .accountability import DEFAULT_K, DEFAULT_ROBUSTNESS_SPREAD, PERFORMANCE_METRICS
from .blocks import DEFAULT_KERNEL_WIDTH, DEFAULT_RIDGE_LAMBDA, MAX_SEED
from .fairness import DEFAULT_TOLERANCE, resolve_metric
from .predictors import MODEL_KINDS
from .transparency import DEFAULT_RESOLUTION

PROBA_PREFIX = "proba:"


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)
    train_fraction: float = 0.7
    seed: int | None = None


@dataclass(frozen=True)
class PredictionsSource:
    column: str | None = None
    model: ModelSpec | None = None


@dataclass(frozen=True)
class FairnessSettings:
    metrics: tuple[str, ...] = ("positive_rate", "tpr", "fpr", "ppv", "accuracy", "equalized_odds")
    tolerance: float = DEFAULT_TOLERANCE
    disparate_impact: bool = True
    data_bias: bool = True
    systemic_bias: bool = True


@dataclass(frozen=True)
class AccountabilitySettings:
    density: bool = True
    k: int = DEFAULT_K
    robustness_rows: tuple[int, ...] = ()
    spread: float = DEFAULT_ROBUSTNESS_SPREAD
    n_samples: int = 1000
    performance_metrics: tuple[str, ...] = ("accuracy",)


@dataclass(frozen=True)
class TransparencySettings:
    pd_features: tuple[str, ...] = ()
    ice_features: tuple[str, ...] = ()
    resolution: int = DEFAULT_RESOLUTION
    surrogate_rows: tuple[int, ...] = ()
    kernel_width: float = DEFAULT_KERNEL_WIDTH
    ridge_lambda: float = DEFAULT_RIDGE_LAMBDA
    n_samples: int = 1000
    spread: float = 1.0


@dataclass(frozen=True)
class AuditConfig:
    seed: int
    data: str
    labels_column: str
    protected: str
    positive: str
    predictions: PredictionsSource
    schema: str | None = None
    features: tuple[str, ...] | None = None
    output: str | None = None
    fairness: FairnessSettings | None = None
    accountability: AccountabilitySettings | None = None
    transparency: TransparencySettings | None = None

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form, excluding file locations."""
        doc = asdict(self)
        for key in ("data", "schema", "output"):
            doc.pop(key)
        canon = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def only(self, *sections: str) -> "AuditConfig":
        """Copy keeping just the named analysis sections."""
        return replace(
            self,
            **{
                s: getattr(self, s) if s in sections else None
                for s in ("fairness", "accountability", "transparency")
            },
        )


# -- validation helpers -----------------------------------------------------------
def _take(doc: dict, key: str, types, where: str, default=..., required=False):
    if key not in doc:
        if required:
            raise errors.ConfigError(f"{where}: missing required key {key!r}")
        return default
    value = doc[key]
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise errors.ConfigError(f"{where}.{key}: expected {types}, got a boolean")
    if not isinstance(value, types):
        raise errors.ConfigError(f"{where}.{key}: expected {types}, got {type(value).__name__}")
    return value


def _str_list(doc, key, where, default=()):
    value = _take(doc, key, list, where, default=None)
    if value is None:
        return tuple(default)
    if not all(isinstance(v, str) and v for v in value):
        raise errors.ConfigError(f"{where}.{key}: expected a list of names")
    return tuple(value)


def _int_list(doc, key, where):
    value = _take(doc, key, list, where, default=[])
    if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in value):
        raise errors.ConfigError(f"{where}.{key}: expected a list of row indices")
    return tuple(value)


def _number(doc, key, where, default, minimum=None, strict=False):
    value = _take(doc, key, (int, float), where, default=default)
    value = float(value)
    if not math.isfinite(value):
        raise errors.ConfigError(f"{where}.{key}: must be finite")
    if minimum is not None and (value <= minimum if strict else value < minimum):
        raise errors.ConfigError(f"{where}.{key}: must be {'>' if strict else '>='} {minimum}")
    return value


def _positive_int(doc, key, where, default):
    value = _take(doc, key, int, where, default=default)
    if value < 1:
        raise errors.ConfigError(f"{where}.{key}: must be >= 1")
    return value


def _no_extra(doc: dict, allowed: set, where: str):
    extra = set(doc) - allowed
    if extra:
        raise errors.ConfigError(f"{where}: unknown keys {sorted(extra)}")


def _predictions(doc) -> PredictionsSource:
    if not isinstance(doc, dict):
        raise errors.ConfigError("[predictions] must be a table")
    where = "predictions"
    _no_extra(doc, {"column", "model", "params", "train_fraction", "seed"}, where)
    has_col, has_model = "column" in doc, "model" in doc
    if has_col == has_model:
        raise errors.ConfigError("[predictions]: give exactly one of 'column' or 'model'")
    if has_col:
        if set(doc) - {"column"}:
            raise errors.ConfigError("[predictions]: model settings given with 'column'")
        return PredictionsSource(column=_take(doc, "column", str, where))
    kind = _take(doc, "model", str, where)
    if kind not in MODEL_KINDS:
        raise errors.ConfigError(f"[predictions]: unknown model {kind!r}; choose from {sorted(MODEL_KINDS)}")
    params = _take(doc, "params", dict, where, default={})
    allowed = {"majority": set(), "knn": {"k"}, "logistic": {"epochs", "learning_rate"}}[kind]
    _no_extra(params, allowed, f"{where}.params")
    fraction = _number(doc, "train_fraction", where, 0.7, minimum=0.0, strict=True)
    if fraction > 1:
        raise errors.ConfigError("predictions.train_fraction must lie in (0, 1]")
    seed = _take(doc, "seed", int, where, default=None)
    if seed is not None and not 0 <= seed <= MAX_SEED:
        raise errors.ConfigError("predictions.seed outside [0, 2**64)")
    return PredictionsSource(model=ModelSpec(kind, dict(params), fraction, seed))


def _fairness(doc) -> FairnessSettings:
    where = "fairness"
    _no_extra(doc, {"metrics", "tolerance", "disparate_impact", "data_bias", "systemic_bias"}, where)
    metrics = _str_list(doc, "metrics", where, FairnessSettings.metrics)
    for m in metrics:
        try:
            resolve_metric(m)
        except errors.UnknownMetric as exc:
            raise errors.ConfigError(str(exc)) from None
    return FairnessSettings(
        metrics=metrics,
        tolerance=_number(doc, "tolerance", where, DEFAULT_TOLERANCE, minimum=0.0),
        disparate_impact=_take(doc, "disparate_impact", bool, where, default=True),
        data_bias=_take(doc, "data_bias", bool, where, default=True),
        systemic_bias=_take(doc, "systemic_bias", bool, where, default=True),
    )


def _accountability(doc) -> AccountabilitySettings:
    where = "accountability"
    _no_extra(
        doc,
        {"density", "k", "robustness_rows", "spread", "n_samples", "performance_metrics"},
        where,
    )
    perf = _str_list(doc, "performance_metrics", where, AccountabilitySettings.performance_metrics)
    for m in perf:
        if m not in PERFORMANCE_METRICS:
            raise errors.ConfigError(f"{where}.performance_metrics: unknown metric {m!r}")
    return AccountabilitySettings(
        density=_take(doc, "density", bool, where, default=True),
        k=_positive_int(doc, "k", where, DEFAULT_K),
        robustness_rows=_int_list(doc, "robustness_rows", where),
        spread=_number(doc, "spread", where, DEFAULT_ROBUSTNESS_SPREAD, minimum=0.0),
        n_samples=_positive_int(doc, "n_samples", where, 1000),
        performance_metrics=perf,
    )


def _transparency(doc) -> TransparencySettings:
    where = "transparency"
    _no_extra(
        doc,
        {"pd_features", "ice_features", "resolution", "surrogate_rows", "kernel_width",
         "ridge_lambda", "n_samples", "spread"},
        where,
    )
    return TransparencySettings(
        pd_features=_str_list(doc, "pd_features", where),
        ice_features=_str_list(doc, "ice_features", where),
        resolution=_positive_int(doc, "resolution", where, DEFAULT_RESOLUTION),
        surrogate_rows=_int_list(doc, "surrogate_rows", where),
        kernel_width=_number(doc, "kernel_width", where, DEFAULT_KERNEL_WIDTH, minimum=0.0, strict=True),
        ridge_lambda=_number(doc, "ridge_lambda", where, DEFAULT_RIDGE_LAMBDA, minimum=0.0),
        n_samples=_positive_int(doc, "n_samples", where, 1000),
        spread=_number(doc, "spread", where, 1.0, minimum=0.0),
    )


def config_from_dict(doc: dict[str, Any], base_dir: Path | None = None) -> AuditConfig:
    where = "config"
    _no_extra(
        doc,
        {"seed", "data", "schema", "labels_column", "protected", "positive", "features",
         "output", "predictions", "fairness", "accountability", "transparency"},
        where,
    )
    seed = _take(doc, "seed", int, where, required=True)
    if not 0 <= seed <= MAX_SEED:
        raise errors.ConfigError("seed outside [0, 2**64)")

    def path(key, required=False):
        value = _take(doc, key, str, where, default=None, required=required)
        if value is None or base_dir is None:
            return value
        return str((base_dir / value)) if not Path(value).is_absolute() else value

    if "predictions" not in doc:
        raise errors.ConfigError("config: missing [predictions] table")
    sections = {}
    for name, builder in (("fairness", _fairness), ("accountability", _accountability),
                          ("transparency", _transparency)):
        if name in doc:
            if not isinstance(doc[name], dict):
                raise errors.ConfigError(f"[{name}] must be a table")
            sections[name] = builder(doc[name])
    features = _str_list(doc, "features", where, default=()) or None
    return AuditConfig(
        seed=seed,
        data=path("data", required=True),
        schema=path("schema"),
        labels_column=_take(doc, "labels_column", str, where, required=True),
        protected=_take(doc, "protected", str, where, required=True),
        positive=_take(doc, "positive", str, where, required=True),
        features=features,
        output=path("output"),
        predictions=_predictions(doc["predictions"]),
        **sections,
    )


def parse_config(text: str, base_dir: Path | None = None) -> AuditConfig:
    try:
        doc = load_toml_text(text)
    except ValueError as exc:
        raise errors.ConfigError(f"unreadable config: {exc}") from None
    return config_from_dict(doc, base_dir)


def load_config(path) -> AuditConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise errors.ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)
