import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fataudit import errors
from fataudit.dataset import (
    Dataset,
    FeatureKind,
    Schema,
    drop_feature,
    format_schema_sidecar,
    group_by_feature,
    infer_schema,
    parse_csv,
    parse_number,
    parse_schema_sidecar,
    read_csv,
    select_rows,
    to_csv,
)

N, C = FeatureKind.NUMERIC, FeatureKind.CATEGORICAL


class TestInferSchema:
    def test_all_numeric(self):
        assert infer_schema(["a"], [["1"], ["2.5"]]).kinds == (N,)

    def test_one_token_forces_categorical(self):
        assert infer_schema(["a"], [["1"], ["x"]]).kinds == (C,)

    def test_duplicate_name(self):
        with pytest.raises(errors.DuplicateName):
            infer_schema(["a", "a"], [["1", "2"]])

    def test_empty_and_ragged(self):
        with pytest.raises(errors.EmptyInput):
            infer_schema(["a"], [])
        with pytest.raises(errors.RaggedRows):
            infer_schema(["a", "b"], [["1"]])

    @pytest.mark.parametrize("name", ["", " a", "a ", "\tb"])
    def test_bad_names(self, name):
        with pytest.raises(errors.InvalidName):
            infer_schema([name], [["1"]])

    def test_empty_cells_ignored(self):
        assert infer_schema(["a"], [["1"], [""]]).kinds == (N,)

    @given(st.lists(st.sampled_from(["1", "-2", "3.5e2", "x", "NaN", "inf", ".5"]), min_size=1, max_size=12), st.randoms())
    def test_order_insensitive(self, cells, rnd):
        rows = [[c] for c in cells]
        shuffled = rows[:]
        rnd.shuffle(shuffled)
        assert infer_schema(["a"], rows) == infer_schema(["a"], shuffled)


@pytest.mark.parametrize(
    "token,value",
    [("1", 1.0), ("-2", -2.0), ("+3.", 3.0), (".25", 0.25), ("1e3", 1000.0), ("2.5E-1", 0.25)],
)
def test_parse_number_accepts(token, value):
    assert parse_number(token) == value


@pytest.mark.parametrize("token", ["", "x", "1,5", "NaN", "inf", "-Infinity", "1e999", " 1", "0x10", "1_000"])
def test_parse_number_rejects(token):
    assert parse_number(token) is None


class TestParseCsv:
    def test_with_schema(self):
        schema = Schema.from_pairs([("a", "numeric"), ("b", "categorical")])
        d = parse_csv("a,b\n1,x\n2,y", schema)
        assert d.shape == (2, 2)
        assert list(d.column("a")) == [1.0, 2.0]
        assert list(d.column("b")) == ["x", "y"]

    def test_ragged(self):
        with pytest.raises(errors.RaggedRows):
            parse_csv("a,b\n1")

    def test_missing_value(self):
        with pytest.raises(errors.MissingValue):
            parse_csv("a,b\n1,\n2,y")
        with pytest.raises(errors.MissingValue):
            parse_csv("a\n1\n\n2\n")

    def test_type_mismatch(self):
        schema = Schema.from_pairs([("a", "numeric")])
        with pytest.raises(errors.TypeMismatch):
            parse_csv("a\n1\nx\n", schema)

    def test_empty(self):
        with pytest.raises(errors.EmptyInput):
            parse_csv("")
        with pytest.raises(errors.EmptyInput):
            parse_csv("a,b\n")

    def test_crlf_and_quotes(self):
        d = parse_csv('a,b\r\n1,"x, ""y"""\r\n2,z')
        assert d.row(0) == (1.0, 'x, "y"')
        assert d.schema.kinds == (N, C)

    def test_round_trip(self):
        d = parse_csv("a\n1\n2\n")
        assert parse_csv(to_csv(d)) == d

    def test_header_schema_mismatch(self):
        with pytest.raises(errors.SchemaMismatch):
            parse_csv("a,b\n1,2", Schema.from_pairs([("b", "numeric"), ("a", "numeric")]))

    def test_category_tokens_are_case_sensitive(self):
        d = parse_csv("g\nA\na\n")
        assert group_by_feature(d, "g").groups == {"A": (0,), "a": (1,)}


token = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00\r"),
    min_size=1,
    max_size=6,
).filter(lambda t: parse_number(t) is None)
number = st.floats(allow_nan=False, allow_infinity=False, width=64)


@st.composite
def csv_datasets(draw):
    n_rows = draw(st.integers(1, 8))
    kinds = draw(st.lists(st.sampled_from([N, C]), min_size=1, max_size=4))
    columns = []
    for k in kinds:
        if k is N:
            columns.append(draw(st.lists(number, min_size=n_rows, max_size=n_rows)))
        else:
            col = draw(st.lists(token, min_size=n_rows, max_size=n_rows))
            columns.append(col)
    schema = Schema.from_pairs((f"f{i}", k) for i, k in enumerate(kinds))
    return Dataset(schema, columns)


@settings(max_examples=80)
@given(csv_datasets())
def test_serialize_parse_identity(d):
    text = to_csv(d)
    again = parse_csv(text)
    assert again == d
    assert to_csv(again) == text


@settings(max_examples=60)
@given(csv_datasets())
def test_group_partition_property(d):
    for name in d.schema.categorical_names():
        idx = group_by_feature(d, name)
        flat = [i for rows in idx.groups.values() for i in rows]
        assert sorted(flat) == list(range(d.n_rows))
        assert len(set(flat)) == len(flat)
        for rows in idx.groups.values():
            assert list(rows) == sorted(set(rows))


class TestGroupBy:
    def test_partition(self):
        d = Dataset.from_dict({"g": ["a", "b", "a"]})
        assert group_by_feature(d, "g").groups == {"a": (0, 2), "b": (1,)}

    def test_single_group(self):
        d = Dataset.from_dict({"g": ["a"] * 4})
        assert group_by_feature(d, "g").groups == {"a": (0, 1, 2, 3)}

    def test_numeric_rejected(self):
        d = Dataset.from_dict({"x": [1.0, 2.0]})
        with pytest.raises(errors.NonCategoricalGrouping):
            group_by_feature(d, "x")

    def test_unknown(self):
        d = Dataset.from_dict({"x": [1.0, 2.0]})
        with pytest.raises(errors.UnknownFeature):
            group_by_feature(d, "nope")


class TestTransforms:
    def setup_method(self):
        self.d = Dataset.from_dict({"x": [1.0, 2.0, 3.0], "g": ["a", "b", "c"]})

    def test_select_all_is_identity(self):
        assert select_rows(self.d, [0, 1, 2]) == self.d

    def test_select_subset(self):
        s = select_rows(self.d, [2, 0])
        assert list(s.rows()) == [(3.0, "c"), (1.0, "a")]
        assert self.d.n_rows == 3

    def test_select_empty(self):
        with pytest.raises(errors.EmptyInput):
            select_rows(self.d, [])

    def test_select_out_of_range(self):
        with pytest.raises(errors.IndexOutOfRange):
            select_rows(self.d, [3])
        with pytest.raises(errors.IndexOutOfRange):
            select_rows(self.d, [-1])

    def test_drop_feature(self):
        s = drop_feature(self.d, "x")
        assert s.schema.names == ("g",)
        assert self.d.schema.names == ("x", "g")
        with pytest.raises(errors.EmptyInput):
            drop_feature(s, "g")
        with pytest.raises(errors.UnknownFeature):
            drop_feature(self.d, "nope")

    def test_columns_are_read_only(self):
        with pytest.raises(ValueError):
            self.d.column("x")[0] = 5.0

    def test_invalid_cells(self):
        schema = Schema.from_pairs([("x", "numeric")])
        with pytest.raises(errors.TypeMismatch):
            Dataset(schema, [[float("nan")]])
        with pytest.raises(errors.TypeMismatch):
            Dataset(schema, [["1"]])
        with pytest.raises(errors.MissingValue):
            Dataset(Schema.from_pairs([("g", "categorical")]), [[""]])


def test_schema_sidecar_round_trip(tmp_path):
    schema = Schema.from_pairs([("age", "numeric"), ("sex", "categorical"), ("odd name", "numeric")])
    text = format_schema_sidecar(schema)
    assert parse_schema_sidecar(text) == schema
    assert parse_schema_sidecar("[features]\nage = \"numeric\"\n").names == ("age",)
    with pytest.raises(errors.DataError):
        parse_schema_sidecar('age = "integer"\n')

    (tmp_path / "d.csv").write_text("sex,age\nm,1\nf,2\n")
    (tmp_path / "s.toml").write_text('age = "categorical"\nsex = "categorical"\n')
    d = read_csv(tmp_path / "d.csv", tmp_path / "s.toml")
    assert d.schema.names == ("sex", "age")
    assert d.schema.kinds == (C, C)
    assert list(d.column("age")) == ["1", "2"]


def test_large_mixed_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    n = 1000
    d = Dataset.from_dict({
        "x": rng.normal(size=n) * 1e3,
        "k": rng.integers(-5, 5, n).astype(float),
        "c": list(rng.choice(["a", "b,c", 'q"uote', "é"], n)),
    })
    path = tmp_path / "big.csv"
    path.write_text(to_csv(d), encoding="utf-8")
    assert read_csv(path) == d
