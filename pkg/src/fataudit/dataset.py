"""Immutable tabular data model, CSV ingestion and group indexing.

A :class:`Dataset` is a rectangular table whose columns are either numeric
(finite float64) or categorical (non-empty ``str`` tokens).  Columns are kept
as read-only numpy arrays; every transform returns a new dataset.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import errors
from ._toml import load_toml_text

_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


class FeatureKind(str, enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Feature:
    name: str
    kind: FeatureKind


def _check_name(name) -> str:
    if not isinstance(name, str) or not name or name != name.strip():
        raise errors.InvalidName(f"invalid feature name {name!r}")
    return name


@dataclass(frozen=True)
class Schema:
    """Ordered list of named, typed features."""

    features: tuple[Feature, ...]

    def __post_init__(self):
        feats = tuple(
            f if isinstance(f, Feature) else Feature(f[0], FeatureKind(f[1]))
            for f in self.features
        )
        if not feats:
            raise errors.EmptyInput("schema has no features")
        seen = set()
        for f in feats:
            _check_name(f.name)
            if f.name in seen:
                raise errors.DuplicateName(f"duplicate feature name {f.name!r}")
            seen.add(f.name)
        object.__setattr__(self, "features", feats)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str | FeatureKind]]) -> "Schema":
        return cls(tuple(Feature(n, FeatureKind(k)) for n, k in pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def kinds(self) -> tuple[FeatureKind, ...]:
        return tuple(f.kind for f in self.features)

    def __len__(self):
        return len(self.features)

    def __iter__(self) -> Iterator[Feature]:
        return iter(self.features)

    def __contains__(self, name) -> bool:
        return any(f.name == name for f in self.features)

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise errors.UnknownFeature(f"unknown feature {name!r}")

    def kind(self, name: str) -> FeatureKind:
        return self.features[self.index(name)].kind

    def numeric_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features if f.kind is FeatureKind.NUMERIC)

    def categorical_names(self) -> tuple[str, ...]:
        return tuple(
            f.name for f in self.features if f.kind is FeatureKind.CATEGORICAL
        )

    def to_dict(self) -> dict[str, str]:
        return {f.name: f.kind.value for f in self.features}


def parse_number(token: str) -> float | None:
    """Return the float value of a decimal literal, or None if it is not one."""
    if not _NUMBER_RE.fullmatch(token):
        return None
    value = float(token)
    if not math.isfinite(value):
        return None
    return value


def _numeric_cell(value, name):
    if isinstance(value, (bool, np.bool_)) or not isinstance(
        value, (int, float, np.integer, np.floating)
    ):
        raise errors.TypeMismatch(f"feature {name!r} expects a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise errors.TypeMismatch(f"feature {name!r}: non-finite value {value!r}")
    return value


def _category_cell(value, name):
    if not isinstance(value, str):
        raise errors.TypeMismatch(
            f"feature {name!r} expects a category token, got {value!r}"
        )
    if value == "":
        raise errors.MissingValue(f"feature {name!r}: empty category token")
    return value


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _column_array(values, feature: Feature) -> np.ndarray:
    if feature.kind is FeatureKind.NUMERIC:
        if isinstance(values, np.ndarray) and values.dtype.kind in "fiu":
            arr = np.array(values, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise errors.TypeMismatch(
                    f"feature {feature.name!r}: non-finite values"
                )
        else:
            arr = np.array(
                [_numeric_cell(v, feature.name) for v in values], dtype=np.float64
            )
    else:
        arr = np.empty(len(values), dtype=object)
        arr[:] = [_category_cell(v, feature.name) for v in values]
    return _freeze(arr)


class Dataset:
    """Immutable table of mixed numeric/categorical columns."""

    __slots__ = ("schema", "_columns")

    def __init__(self, schema: Schema, columns: Sequence):
        if len(columns) != len(schema):
            raise errors.RaggedRows(
                f"{len(columns)} columns given for {len(schema)} features"
            )
        cols = tuple(_column_array(c, f) for c, f in zip(columns, schema))
        lengths = {len(c) for c in cols}
        if len(lengths) != 1:
            raise errors.RaggedRows("columns have different lengths")
        self.schema = schema
        self._columns = cols

    @classmethod
    def _trusted(cls, schema: Schema, columns: tuple) -> "Dataset":
        obj = cls.__new__(cls)
        obj.schema = schema
        obj._columns = columns
        return obj

    @classmethod
    def from_rows(cls, schema: Schema, rows: Iterable[Sequence]) -> "Dataset":
        rows = [tuple(r) for r in rows]
        width = len(schema)
        for i, r in enumerate(rows):
            if len(r) != width:
                raise errors.RaggedRows(
                    f"row {i} has {len(r)} cells, expected {width}"
                )
        columns = [[r[j] for r in rows] for j in range(width)]
        return cls(schema, columns)

    @classmethod
    def from_dict(cls, data: Mapping[str, Sequence], kinds: Mapping[str, str] | None = None) -> "Dataset":
        """Build from ``{name: values}``; kinds default to numeric unless any value is a str."""
        pairs = []
        for name, values in data.items():
            if kinds and name in kinds:
                kind = FeatureKind(kinds[name])
            elif any(isinstance(v, str) for v in values):
                kind = FeatureKind.CATEGORICAL
            else:
                kind = FeatureKind.NUMERIC
            pairs.append((name, kind))
        return cls(Schema.from_pairs(pairs), list(data.values()))

    # -- shape -----------------------------------------------------------
    @property
    def n_rows(self) -> int:
        return len(self._columns[0])

    @property
    def n_features(self) -> int:
        return len(self._columns)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_features

    def __len__(self):
        return self.n_rows

    # -- access ----------------------------------------------------------
    def column(self, name: str) -> np.ndarray:
        return self._columns[self.schema.index(name)]

    @property
    def columns(self) -> tuple[np.ndarray, ...]:
        return self._columns

    def row(self, i: int) -> tuple:
        if not -self.n_rows <= i < self.n_rows:
            raise errors.IndexOutOfRange(f"row {i} out of range")
        return tuple(
            float(c[i]) if f.kind is FeatureKind.NUMERIC else c[i]
            for c, f in zip(self._columns, self.schema)
        )

    def rows(self) -> Iterator[tuple]:
        for i in range(self.n_rows):
            yield self.row(i)

    def categories(self, name: str) -> tuple[str, ...]:
        if self.schema.kind(name) is not FeatureKind.CATEGORICAL:
            raise errors.NonCategoricalGrouping(f"feature {name!r} is not categorical")
        return tuple(sorted(set(self.column(name))))

    # -- transforms ------------------------------------------------------
    def select_rows(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        if idx.size == 0:
            raise errors.EmptyInput("row selection is empty")
        if idx.min() < 0 or idx.max() >= self.n_rows:
            raise errors.IndexOutOfRange("row index out of range")
        return Dataset._trusted(
            self.schema, tuple(_freeze(c[idx]) for c in self._columns)
        )

    def drop_feature(self, name: str) -> "Dataset":
        j = self.schema.index(name)
        if self.n_features == 1:
            raise errors.EmptyInput("cannot drop the only feature")
        feats = self.schema.features[:j] + self.schema.features[j + 1 :]
        cols = self._columns[:j] + self._columns[j + 1 :]
        return Dataset._trusted(Schema(feats), cols)

    def with_column(self, name: str, values) -> "Dataset":
        """Copy with one existing column replaced."""
        j = self.schema.index(name)
        col = _column_array(values, self.schema.features[j])
        if len(col) != self.n_rows:
            raise errors.LengthMismatch("replacement column has wrong length")
        cols = self._columns[:j] + (col,) + self._columns[j + 1 :]
        return Dataset._trusted(self.schema, cols)

    def repeat_rows(self, count: int) -> "Dataset":
        """Stack ``count`` copies of the table (copy-major order)."""
        return Dataset._trusted(
            self.schema, tuple(_freeze(np.tile(c, count)) for c in self._columns)
        )

    # -- comparison ------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.schema == other.schema and all(
            a.shape == b.shape and bool(np.all(a == b))
            for a, b in zip(self._columns, other._columns)
        )

    def __hash__(self):
        return hash((self.schema, self.n_rows))

    def __repr__(self):
        return f"Dataset(n_rows={self.n_rows}, features={list(self.schema.names)})"


def select_rows(d: Dataset, indices: Sequence[int]) -> Dataset:
    return d.select_rows(indices)


def drop_feature(d: Dataset, name: str) -> Dataset:
    return d.drop_feature(name)


def check_instance(schema: Schema, instance: Sequence) -> tuple:
    """Validate one row against ``schema``; numbers are coerced to float."""
    instance = tuple(instance)
    if len(instance) != len(schema):
        raise errors.SchemaMismatch(
            f"instance has {len(instance)} values, schema has {len(schema)}"
        )
    out = []
    for v, f in zip(instance, schema):
        try:
            if f.kind is FeatureKind.NUMERIC:
                out.append(_numeric_cell(v, f.name))
            else:
                out.append(_category_cell(v, f.name))
        except errors.DataError as exc:
            raise errors.SchemaMismatch(str(exc)) from None
    return tuple(out)


def instance_dataset(schema: Schema, instance: Sequence) -> Dataset:
    return Dataset.from_rows(schema, [check_instance(schema, instance)])


# -- groups -------------------------------------------------------------------
@dataclass(frozen=True)
class GroupIndex:
    """Partition of row indices by the tokens of one categorical feature."""

    grouping_feature: str
    groups: Mapping[str, tuple[int, ...]]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.groups)

    def __len__(self):
        return len(self.groups)


def group_by_feature(d: Dataset, feature: str) -> GroupIndex:
    if d.schema.kind(feature) is not FeatureKind.CATEGORICAL:
        raise errors.NonCategoricalGrouping(
            f"cannot group on numeric feature {feature!r}"
        )
    buckets: dict[str, list[int]] = {}
    for i, token in enumerate(d.column(feature)):
        buckets.setdefault(token, []).append(i)
    return GroupIndex(feature, {k: tuple(buckets[k]) for k in sorted(buckets)})


# -- CSV ----------------------------------------------------------------------
def infer_schema(header: Sequence[str], sample_rows: Sequence[Sequence[str]]) -> Schema:
    """Numeric iff every non-empty cell of a column parses as a finite number."""
    header = list(header)
    if not header:
        raise errors.EmptyInput("empty header")
    if not sample_rows:
        raise errors.EmptyInput("no data rows")
    width = len(header)
    numeric = [True] * width
    for i, r in enumerate(sample_rows):
        if len(r) != width:
            raise errors.RaggedRows(f"row {i} has {len(r)} cells, expected {width}")
        for j, cell in enumerate(r):
            if numeric[j] and cell != "" and parse_number(cell) is None:
                numeric[j] = False
    return Schema.from_pairs(
        (name, FeatureKind.NUMERIC if num else FeatureKind.CATEGORICAL)
        for name, num in zip(header, numeric)
    )


def read_records(text: str) -> tuple[list[str], list[list[str]]]:
    if text.startswith("\ufeff"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    try:
        records = list(reader)
    except csv.Error as exc:
        raise errors.DataError(f"malformed CSV: {exc}") from None
    if not records:
        raise errors.EmptyInput("no header row")
    header, body = records[0], records[1:]
    if not body:
        raise errors.EmptyInput("no data rows")
    width = len(header)
    for i, r in enumerate(body):
        if len(r) != width:
            if width == 1 and not r:
                raise errors.MissingValue(f"row {i}: empty cell")
            raise errors.RaggedRows(f"row {i} has {len(r)} cells, expected {width}")
    return header, body


def parse_csv(text: str, schema: Schema | None = None) -> Dataset:
    """Parse comma-delimited text whose first record is the header."""
    header, body = read_records(text)
    if schema is None:
        schema = infer_schema(header, body)
    elif tuple(header) != schema.names:
        raise errors.SchemaMismatch(
            f"header {header} does not match schema {list(schema.names)}"
        )
    else:
        infer_schema(header, body)  # same structural checks
    columns = []
    for j, f in enumerate(schema):
        raw = [r[j] for r in body]
        for i, cell in enumerate(raw):
            if cell == "":
                raise errors.MissingValue(f"row {i}, feature {f.name!r}: empty cell")
        if f.kind is FeatureKind.NUMERIC:
            col = []
            for i, cell in enumerate(raw):
                value = parse_number(cell)
                if value is None:
                    raise errors.TypeMismatch(
                        f"row {i}, feature {f.name!r}: {cell!r} is not a number"
                    )
                col.append(value)
            columns.append(np.array(col, dtype=np.float64))
        else:
            columns.append(raw)
    return Dataset(schema, columns)


def format_number(x: float) -> str:
    """Shortest repr that round-trips through :func:`parse_number`."""
    return repr(float(x))


def to_csv(d: Dataset) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(d.schema.names)
    numeric = [f.kind is FeatureKind.NUMERIC for f in d.schema]
    for i in range(d.n_rows):
        writer.writerow(
            format_number(c[i]) if num else c[i]
            for c, num in zip(d.columns, numeric)
        )
    return buf.getvalue()


def parse_schema_sidecar(text: str) -> Schema:
    """Schema sidecar: TOML key-value pairs ``name = "numeric" | "categorical"``.

    The pairs may also sit under a ``[features]`` table.
    """
    try:
        doc = load_toml_text(text)
    except ValueError as exc:
        raise errors.DataError(f"unreadable schema file: {exc}") from None
    if set(doc) == {"features"} and isinstance(doc["features"], dict):
        doc = doc["features"]
    pairs = []
    for name, kind in doc.items():
        try:
            pairs.append((name, FeatureKind(kind)))
        except ValueError:
            raise errors.DataError(
                f"schema: feature {name!r} has unknown kind {kind!r}"
            ) from None
    return Schema.from_pairs(pairs)


def format_schema_sidecar(schema: Schema) -> str:
    return "".join(
        f"{json.dumps(f.name, ensure_ascii=False)} = \"{f.kind.value}\"\n"
        for f in schema
    )


def read_csv(path, schema_path=None) -> Dataset:
    text = Path(path).read_text(encoding="utf-8")
    schema = None
    if schema_path is not None:
        declared = parse_schema_sidecar(Path(schema_path).read_text(encoding="utf-8"))
        header, _ = read_records(text)
        missing = set(header) ^ set(declared.names)
        if missing:
            raise errors.SchemaMismatch(
                f"schema file and CSV header disagree on {sorted(missing)}"
            )
        kinds = declared.to_dict()
        schema = Schema.from_pairs((h, kinds[h]) for h in header)
    return parse_csv(text, schema)


def write_csv(d: Dataset, path) -> None:
    Path(path).write_text(to_csv(d), encoding="utf-8", newline="")
