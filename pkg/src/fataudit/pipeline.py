"""Deployment mode (data in, report out) and research mode (data in,
plot tables out).

:func:`run_audit` loads the data named in an :class:`AuditConfig`, resolves
the predictions source, runs the requested analyses and assembles an
ordered report dictionary; :func:`render_report` turns it into bytes.
:func:`run_research` produces long-format tables for PD/ICE curves and
surrogate weights, which :func:`write_bundle` writes as CSV (plus optional
SVG line charts).
"""
from __future__ import annotations

import datetime
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, accountability, blocks, errors, fairness, transparency
from .config import PROBA_PREFIX, AuditConfig
from .dataset import (
    Dataset,
    FeatureKind,
    Schema,
    infer_schema,
    parse_csv,
    parse_schema_sidecar,
    read_records,
)
from .predictors import MODEL_KINDS, PrecomputedPredictor, ProbabilityMatrix, as_labels
from .report import dumps, table_to_csv
from .svg import line_chart

TOOL_NAME = "fataudit"


# -- loading ----------------------------------------------------------------------
@dataclass(frozen=True)
class AuditData:
    """Everything the analyses need, resolved from a config."""

    table: Dataset  # every column of the CSV
    features: Dataset  # model inputs, all rows
    labels: np.ndarray
    predictor: object
    source: str
    audit_rows: tuple[int, ...]
    reference_rows: tuple[int, ...]  # training rows, or all rows for precomputed
    can_query: bool

    @property
    def audit_features(self) -> Dataset:
        return self.features.select_rows(self.audit_rows)

    @property
    def reference(self) -> Dataset:
        return self.features.select_rows(self.reference_rows)


def _staged(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except errors.FatAuditError as exc:
        if exc.stage is None:
            exc.stage = stage
        raise
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise errors.AnalysisError(f"{type(exc).__name__}: {exc}", stage=stage) from exc


def load_table(cfg: AuditConfig) -> Dataset:
    try:
        text = Path(cfg.data).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise errors.DataError(f"cannot read data file {cfg.data}: {exc}", stage="load") from None
    header, body = read_records(text)
    if cfg.schema is not None:
        try:
            sidecar = Path(cfg.schema).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise errors.DataError(f"cannot read schema file {cfg.schema}: {exc}") from None
        declared = parse_schema_sidecar(sidecar)
        differ = set(header) ^ set(declared.names)
        if differ:
            raise errors.SchemaMismatch(f"schema file and CSV header disagree on {sorted(differ)}")
        kinds = declared.to_dict()
    else:
        kinds = infer_schema(header, body).to_dict()
    # label-like columns are tokens even when they look numeric
    for name in (cfg.labels_column, cfg.predictions.column):
        if name in kinds:
            kinds[name] = FeatureKind.CATEGORICAL.value
    for name in kinds:
        if name.startswith(PROBA_PREFIX):
            kinds[name] = FeatureKind.NUMERIC.value
    schema = Schema.from_pairs((h, kinds[h]) for h in header)
    return parse_csv(text, schema)


def _require_columns(table: Dataset, cfg: AuditConfig):
    names = set(table.schema.names)
    wanted = [cfg.labels_column, cfg.protected]
    if cfg.predictions.column:
        wanted.append(cfg.predictions.column)
    wanted += list(cfg.features or ())
    missing = [w for w in wanted if w not in names]
    if missing:
        raise errors.ConfigError(f"columns not found in data: {missing}", stage="validate")


def feature_names(table: Dataset, cfg: AuditConfig) -> tuple[str, ...]:
    if cfg.features:
        names = tuple(cfg.features)
    else:
        skip = {cfg.labels_column, cfg.predictions.column}
        names = tuple(
            n for n in table.schema.names if n not in skip and not n.startswith(PROBA_PREFIX)
        )
    if cfg.protected not in names:
        raise errors.ConfigError(
            f"protected feature {cfg.protected!r} must be one of the features", stage="validate"
        )
    if cfg.labels_column in names or (cfg.predictions.column and cfg.predictions.column in names):
        raise errors.ConfigError("labels/predictions columns cannot be features", stage="validate")
    return names


def _project(table: Dataset, names: Sequence[str]) -> Dataset:
    schema = Schema(tuple(table.schema.features[table.schema.index(n)] for n in names))
    return Dataset._trusted(schema, tuple(table.column(n) for n in names))


def _probabilities(table: Dataset) -> ProbabilityMatrix | None:
    cols = [n for n in table.schema.names if n.startswith(PROBA_PREFIX)]
    if not cols:
        return None
    labels = sorted(c[len(PROBA_PREFIX):] for c in cols)
    values = np.column_stack([table.column(PROBA_PREFIX + l) for l in labels])
    if np.any(values < 0) or np.any(values > 1):
        raise errors.DataError("probability columns must lie in [0, 1]", stage="load")
    if np.any(np.abs(values.sum(axis=1) - 1.0) > 1e-9):
        raise errors.DataError("probability columns must sum to 1 per row", stage="load")
    return ProbabilityMatrix(tuple(labels), values)


def split_rows(n: int, fraction: float, seed: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Seeded shuffle; the first ceil(fraction * n) indices train, the rest audit."""
    perm = blocks.rng(seed, 0).permutation(n)
    n_train = min(n, max(1, math.ceil(fraction * n)))
    train = tuple(sorted(int(i) for i in perm[:n_train]))
    rest = tuple(sorted(int(i) for i in perm[n_train:]))
    return train, rest


def load_audit_data(cfg: AuditConfig) -> AuditData:
    table = _staged("load", load_table, cfg)
    _require_columns(table, cfg)
    names = feature_names(table, cfg)
    features = _staged("load", _project, table, names)
    labels = as_labels(table.column(cfg.labels_column))
    all_rows = tuple(range(table.n_rows))
    src = cfg.predictions
    if src.column is not None:
        predictor = _staged(
            "predictions",
            PrecomputedPredictor,
            features,
            table.column(src.column),
            _staged("predictions", _probabilities, table),
        )
        return AuditData(table, features, labels, predictor, f"column:{src.column}",
                         all_rows, all_rows, False)
    spec = src.model
    seed = cfg.seed if spec.seed is None else spec.seed
    train, rest = split_rows(table.n_rows, spec.train_fraction, seed)
    cls = MODEL_KINDS[spec.kind]
    params = dict(spec.params)
    if spec.kind == "logistic":
        params.setdefault("seed", seed)

    def fit():
        try:
            model = cls(**params)
        except TypeError as exc:
            raise errors.ConfigError(f"bad model parameters: {exc}") from None
        return model.fit(features.select_rows(train), labels[list(train)])

    predictor = _staged("train", fit)
    audit = rest if rest else all_rows
    return AuditData(table, features, labels, predictor, f"model:{spec.kind}",
                     audit, train, True)


def _check_requests(cfg: AuditConfig, data: AuditData):
    n = data.table.n_rows
    acc, tra = cfg.accountability, cfg.transparency
    rows = []
    if acc:
        rows += acc.robustness_rows
        if acc.robustness_rows and not data.can_query:
            raise errors.ConfigError(
                "robustness needs a queryable model, not precomputed predictions", stage="validate"
            )
    if tra:
        rows += tra.surrogate_rows
        wants = tra.pd_features or tra.ice_features or tra.surrogate_rows
        if wants and not data.can_query:
            raise errors.ConfigError(
                "transparency analyses need a queryable model, not precomputed predictions",
                stage="validate",
            )
        for f in tra.pd_features + tra.ice_features:
            if f not in data.features.schema:
                raise errors.ConfigError(f"unknown feature {f!r} requested", stage="validate")
    bad = [r for r in rows if r >= n]
    if bad:
        raise errors.ConfigError(f"row indices out of range: {bad}", stage="validate")


# -- report sections ------------------------------------------------------------------
def _pairs(pairs) -> list:
    return [[g, h] for g, h in pairs]


def _gap(report: fairness.DisparityReport, g: str, h: str) -> float:
    a, b = report.values[g], report.values[h]
    if report.metric == fairness.EQUALIZED_ODDS:
        return max(abs(a[k] - b[k]) for k in ("tpr", "fpr") if a[k] is not None and b[k] is not None)
    return abs(a - b)


def fairness_section(cfg: AuditConfig, data: AuditData) -> tuple[dict, list]:
    """Returns the section and a list of (gap, metric, g, h) violations."""
    settings = cfg.fairness
    X = data.audit_features
    y_true = data.labels[list(data.audit_rows)]
    y_pred = as_labels(data.predictor.predict(X))
    gc = fairness.grouped_confusion(X, cfg.protected, y_true, y_pred, cfg.positive)
    group_rates = gc.rates()
    pooled = gc.pooled()
    section = {
        "protected": cfg.protected,
        "positive": cfg.positive,
        "tolerance": settings.tolerance,
        "n_rows": X.n_rows,
        "groups": {g: cm.n for g, cm in gc.matrices.items()},
        "confusion": {g: cm.to_dict() for g, cm in gc.matrices.items()},
        "rates": group_rates,
        "pooled": {"confusion": pooled.to_dict(), "rates": fairness.rates(pooled)},
    }
    violations = []
    disparities = {}
    for metric in settings.metrics:
        rep = fairness.disparity_from_rates(group_rates, metric, settings.tolerance)
        bad = rep.violating_pairs()
        violations += [(_gap(rep, g, h), metric, g, h) for g, h in bad]
        disparities[metric] = {
            "resolved_metric": rep.metric,
            "values": dict(rep.values),
            "violations": _pairs(bad),
            "indeterminate": _pairs(rep.indeterminate_pairs()),
            "undefined_groups": list(rep.undefined_groups),
        }
    section["disparities"] = disparities
    if settings.disparate_impact:
        di = fairness.disparate_impact(X, cfg.protected, y_pred, cfg.positive)
        section["disparate_impact"] = {
            "ratio": di.ratio,
            "threshold": 0.8,
            "pass": di.passed,
            "positive_rates": dict(di.positive_rates),
            "min_group": di.min_group,
            "max_group": di.max_group,
        }
        if not di.passed:
            gap = di.positive_rates[di.max_group] - di.positive_rates[di.min_group]
            violations.append((gap, "disparate_impact", di.min_group, di.max_group))
    if settings.data_bias:
        db = fairness.data_bias_summary(data.features, cfg.protected, data.labels)
        section["data_bias"] = {
            "group_sizes": dict(db.group_sizes),
            "label_distribution": {g: dict(v) for g, v in db.label_distribution.items()},
            "max_gap": db.max_gap,
            "worst": None if db.worst is None else
            {"label": db.worst[0], "groups": [db.worst[1], db.worst[2]]},
        }
    if settings.systemic_bias:
        pairs = fairness.systemic_bias_pairs(data.features, cfg.protected, data.labels)
        section["systemic_bias_pairs"] = [[a, b] for a, b in pairs]
    return section, violations


def _summary(values) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {"min": float(arr.min()), "mean": float(arr.mean()), "max": float(arr.max())}


def accountability_section(cfg: AuditConfig, data: AuditData) -> dict:
    settings = cfg.accountability
    section: dict = {}
    reference = data.reference
    if settings.density:
        scorer = accountability.density_fit(reference, settings.k)
        scores = scorer.score_many(data.audit_features)
        section["density"] = {
            "k": settings.k,
            "reference_rows": reference.n_rows,
            "normalization": scorer.normalization,
            "summary": _summary(scores),
            "rows": list(data.audit_rows),
            "scores": [float(s) for s in scores],
        }
    if settings.robustness_rows:
        results = []
        for row in settings.robustness_rows:
            sampler = blocks.SamplerConfig(settings.n_samples, cfg.seed, settings.spread)
            res = accountability.robustness_flip_rate(
                data.predictor, data.features.row(row), reference, sampler
            )
            results.append({
                "row": row,
                "base_prediction": res.base_prediction,
                "flip_rate": res.flip_rate,
                "n_flips": res.n_flips,
                "n_samples": res.n_samples,
                "spread": settings.spread,
                "seed": res.seed,
            })
        section["robustness"] = results
    if settings.performance_metrics:
        X = data.audit_features
        y_true = data.labels[list(data.audit_rows)]
        y_pred = as_labels(data.predictor.predict(X))
        perf = {}
        for metric in settings.performance_metrics:
            values = accountability.performance_from_predictions(
                X, cfg.protected, y_true, y_pred, metric, cfg.positive
            )
            perf[metric] = {"values": values, "gap": accountability.performance_gap(values)}
        section["performance"] = perf
    return section


def _grid_values(grid: transparency.Grid) -> list:
    return list(grid.points)


def transparency_section(cfg: AuditConfig, data: AuditData) -> dict:
    settings = cfg.transparency
    section: dict = {}
    X = data.audit_features
    if settings.pd_features:
        pd = {}
        for f in settings.pd_features:
            res = transparency.partial_dependence(
                data.predictor, X, f, settings.resolution, cfg.positive
            )
            pd[f] = {"grid": _grid_values(res.grid), "curve": res.curve}
        section["partial_dependence"] = pd
    if settings.ice_features:
        out = {}
        for f in settings.ice_features:
            res = transparency.ice(data.predictor, X, f, settings.resolution, cfg.positive)
            out[f] = {
                "grid": _grid_values(res.grid),
                "rows": list(data.audit_rows),
                "curves": res.curves,
            }
        section["ice"] = out
    if settings.surrogate_rows:
        section["surrogates"] = [
            {"row": row, **explain_row(cfg, data, row).as_dict()}
            for row in settings.surrogate_rows
        ]
    return section


def explain_row(cfg: AuditConfig, data: AuditData, row: int) -> transparency.SurrogateExplanation:
    s = cfg.transparency or _default_transparency()
    sampler = blocks.SamplerConfig(s.n_samples, cfg.seed, s.spread)
    return transparency.surrogate_explain(
        data.predictor,
        data.features.row(row),
        data.reference,
        sampler=sampler,
        kernel_width=s.kernel_width,
        ridge_lambda=s.ridge_lambda,
        positive=cfg.positive,
    )


def _default_transparency():
    from .config import TransparencySettings

    return TransparencySettings()


# -- deployment mode ----------------------------------------------------------------
def run_audit(cfg: AuditConfig, data: AuditData | None = None, stamp: bool = False) -> dict:
    """Run every analysis requested in ``cfg`` and return the ordered report."""
    if data is None:
        data = load_audit_data(cfg)
    _check_requests(cfg, data)
    meta = {
        "tool": TOOL_NAME,
        "version": __version__,
        "config_digest": cfg.digest(),
        "seed": cfg.seed,
        "predictions": data.source,
        "data_rows": data.table.n_rows,
        "reference_rows": len(data.reference_rows),
        "audited_rows": len(data.audit_rows),
        "features": list(data.features.schema.names),
    }
    if stamp:
        meta["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"
        )
    report: dict = {"meta": meta}
    violations: list = []
    if cfg.fairness is not None:
        report["fairness"], violations = _staged("fairness", fairness_section, cfg, data)
    if cfg.accountability is not None:
        report["accountability"] = _staged("accountability", accountability_section, cfg, data)
    if cfg.transparency is not None:
        report["transparency"] = _staged("transparency", transparency_section, cfg, data)
    worst = None
    if violations:
        # largest gap; earlier metric/pair order wins ties
        gap, metric, g, h = max(violations, key=lambda v: v[0])
        worst = {"metric": metric, "groups": [g, h], "gap": gap}
    report["violations"] = {"count": len(violations), "worst_pair": worst}
    return report


def render_report(report: dict) -> bytes:
    return dumps(report).encode("utf-8")


# -- research mode ------------------------------------------------------------------
CURVE_HEADER = ("feature", "grid_value", "row_id", "response")
SURROGATE_HEADER = ("row", "encoded_feature", "weight")


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]

    def to_csv(self) -> str:
        return table_to_csv(self.header, self.rows)


@dataclass(frozen=True)
class Request:
    kind: str  # "pd" | "ice" | "surrogate"
    target: str | int


@dataclass
class PlotBundle:
    tables: dict[str, Table] = field(default_factory=dict)


def requests_from_config(cfg: AuditConfig) -> list[Request]:
    s = cfg.transparency
    if s is None:
        return []
    return (
        [Request("pd", f) for f in s.pd_features]
        + [Request("ice", f) for f in s.ice_features]
        + [Request("surrogate", r) for r in s.surrogate_rows]
    )


def pd_table(res: transparency.PDResult) -> Table:
    f = res.grid.feature
    return Table(CURVE_HEADER, tuple((f, v, "PD", float(y)) for v, y in zip(res.grid.points, res.curve)))


def ice_table(res: transparency.ICEResult, row_ids: Sequence[int]) -> Table:
    f = res.grid.feature
    rows = [
        (f, v, str(rid), float(res.curves[i, j]))
        for i, rid in enumerate(row_ids)
        for j, v in enumerate(res.grid.points)
    ]
    pd = transparency.pd_from_ice(res)
    rows += [(f, v, "PD", float(y)) for v, y in zip(pd.grid.points, pd.curve)]
    return Table(CURVE_HEADER, tuple(rows))


def surrogate_table(row: int, exp: transparency.SurrogateExplanation) -> Table:
    return Table(
        SURROGATE_HEADER, tuple((row, n, w) for n, w in zip(exp.feature_names, exp.weights))
    )


def run_research(
    cfg: AuditConfig, requests: Sequence[Request] | None = None, data: AuditData | None = None
) -> PlotBundle:
    """Plot-ready tables for PD, ICE and surrogate requests."""
    if requests is None:
        requests = requests_from_config(cfg)
    if not requests:
        raise errors.EmptyRequest("no visualisation requested", stage="validate")
    if data is None:
        data = load_audit_data(cfg)
    if not data.can_query:
        raise errors.ConfigError(
            "research mode needs a queryable model, not precomputed predictions", stage="validate"
        )
    settings = cfg.transparency or _default_transparency()
    X = data.audit_features
    bundle = PlotBundle()
    for req in requests:
        if req.kind == "pd":
            res = _staged("transparency", transparency.partial_dependence,
                          data.predictor, X, req.target, settings.resolution, cfg.positive)
            bundle.tables[f"pd_{req.target}"] = pd_table(res)
        elif req.kind == "ice":
            res = _staged("transparency", transparency.ice,
                          data.predictor, X, req.target, settings.resolution, cfg.positive)
            bundle.tables[f"ice_{req.target}"] = ice_table(res, data.audit_rows)
        elif req.kind == "surrogate":
            row = int(req.target)
            if not 0 <= row < data.table.n_rows:
                raise errors.ConfigError(f"row {row} out of range", stage="validate")
            exp = _staged("transparency", explain_row, cfg, data, row)
            bundle.tables[f"surrogate_row{row}"] = surrogate_table(row, exp)
        else:
            raise errors.ConfigError(f"unknown request kind {req.kind!r}")
    return bundle


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def write_bundle(bundle: PlotBundle, out_dir, svg: bool = False) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in bundle.tables.items():
        path = out / f"{_safe(name)}.csv"
        path.write_text(table.to_csv(), encoding="utf-8", newline="")
        written.append(path)
        if svg and table.header == CURVE_HEADER:
            spath = out / f"{_safe(name)}.svg"
            spath.write_text(curve_svg(name, table), encoding="utf-8", newline="")
            written.append(spath)
    return written


def curve_svg(title: str, table: Table) -> str:
    """Line chart of a PD/ICE table; categorical grids use category positions."""
    grid = []
    for r in table.rows:
        if r[1] not in grid:
            grid.append(r[1])
    numeric = all(isinstance(v, float) for v in grid)
    xpos = {v: (v if numeric else float(i)) for i, v in enumerate(grid)}
    series: dict[str, list] = {}
    for _, v, rid, y in table.rows:
        series.setdefault(rid, []).append((xpos[v], y))
    return line_chart(title, series, highlight="PD")
