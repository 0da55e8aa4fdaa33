import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fataudit import blocks, errors
from fataudit.predictors import logistic_fit
from fataudit.transparency import (
    Grid,
    ice,
    make_grid,
    partial_dependence,
    pd_from_ice,
    surrogate_explain,
    weighted_r2,
)
from helpers import FunctionPredictor, make_dataset


def linear_box(schema, a=3.0, b=0.0):
    def prob(r):
        return min(max(0.5 + (a * r[0] + b * r[1]) / 30.0, 0.0), 1.0)

    return FunctionPredictor(schema, lambda r: "pos" if prob(r) > 0.5 else "neg", ["pos", "neg"], prob, "pos")


@pytest.fixture
def normal_data():
    rng = np.random.default_rng(21)
    return make_dataset({"x1": rng.normal(size=200), "x2": rng.normal(size=200)})


class TestGrid:
    def test_numeric(self):
        d = make_dataset({"x": [0.0, 4.0, 1.0]})
        assert make_grid(d, "x", 5).points == (0.0, 1.0, 2.0, 3.0, 4.0)

    def test_constant(self):
        assert make_grid(make_dataset({"x": [2.0, 2.0]}), "x").points == (2.0,)

    def test_categorical_sorted(self):
        d = make_dataset({"c": ["b", "a", "b"]})
        assert make_grid(d, "c").points == ("a", "b")

    def test_bad_resolution(self):
        with pytest.raises(errors.ConfigError):
            make_grid(make_dataset({"x": [0.0, 1.0]}), "x", 0)


class TestICE:
    def test_exhaustive_substitution(self, mixed_data):
        d, _ = mixed_data

        def prob(r):
            return 1 / (1 + np.exp(-(r[0] - 0.1 * r[1] + (r[2] == "red"))))

        p = FunctionPredictor(d.schema, lambda r: "yes", ["yes", "no"], prob, "yes")
        for feature in ("x2", "colour"):
            res = ice(p, d, feature, 7, positive="yes")
            j = d.schema.index(feature)
            for i, row in enumerate(d.rows()):
                for k, v in enumerate(res.grid.points):
                    r = list(row)
                    r[j] = v
                    assert res.curves[i, k] == prob(r)

    def test_shape_and_pd_is_mean(self, mixed_data):
        d, y = mixed_data
        m = logistic_fit(d, y, epochs=100)
        res = ice(m, d, "x1", 9, positive="yes")
        assert res.curves.shape == (d.n_rows, 9)
        pd = pd_from_ice(res)
        assert np.allclose(pd.curve, res.curves.mean(axis=0))
        assert np.array_equal(partial_dependence(m, d, "x1", 9, "yes").curve, pd.curve)

    def test_irrelevant_feature_is_flat(self, normal_data):
        p = linear_box(normal_data.schema)
        res = ice(p, normal_data, "x2", 11, positive="pos")
        assert np.all(res.curves == res.curves[:, :1])

    def test_logistic_closed_form(self, mixed_data):
        d, y = mixed_data
        m = logistic_fit(d, y, epochs=100)
        res = ice(m, d, "x1", 5, positive="yes")
        X = blocks.one_hot_encode(d, m.levels).matrix.copy()
        j = list(blocks.one_hot_encode(d, m.levels).labels).index("x1")
        for k, v in enumerate(res.grid.points):
            X[:, j] = v
            want = 1 / (1 + np.exp(-(X @ m.coef_ + m.intercept_)))
            assert np.allclose(res.curves[:, k], want, atol=1e-12)

    def test_indicator_without_proba(self, normal_data):
        p = FunctionPredictor(normal_data.schema, lambda r: "pos" if r[0] > 0 else "neg", ["pos", "neg"])
        res = ice(p, normal_data, "x1", Grid("x1", (-1.0, 1.0)), positive="pos")
        assert np.all(res.curves[:, 0] == 0.0) and np.all(res.curves[:, 1] == 1.0)

    def test_needs_positive(self, normal_data):
        with pytest.raises(errors.UnknownPositiveLabel):
            ice(linear_box(normal_data.schema), normal_data, "x1")

    def test_wrong_grid(self, normal_data):
        with pytest.raises(errors.ConfigError):
            ice(linear_box(normal_data.schema), normal_data, "x1", Grid("x2", (0.0,)), "pos")


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(2, 12))
def test_pd_of_linear_box_is_linear(a, b, res):
    rng = np.random.default_rng(5)
    d = make_dataset({"x1": rng.uniform(-1, 1, 40), "x2": rng.uniform(-1, 1, 40)})
    pd = partial_dependence(linear_box(d.schema, a, b), d, "x1", res, "pos")
    second = np.diff(pd.curve, 2)
    assert np.all(np.abs(second) <= 1e-12)


class TestSurrogate:
    def test_linear_box_recovered(self, normal_data):
        p = linear_box(normal_data.schema)
        exp = surrogate_explain(p, [0.0, 0.0], normal_data, blocks.SamplerConfig(1000, 4, 1.0), 0.25, 1e-6, "pos")
        w = dict(zip(exp.feature_names, exp.weights))
        assert w["x1"] == pytest.approx(0.1, abs=1e-3)
        assert abs(w["x2"]) < 1e-3
        assert exp.fidelity > 0.99

    def test_median_threshold_box(self, normal_data):
        med = float(np.median(normal_data.column("x1")))
        p = FunctionPredictor(normal_data.schema, lambda r: "pos" if r[0] > med else "neg", ["pos", "neg"])
        exp = surrogate_explain(p, [med, 0.0], normal_data, blocks.SamplerConfig(1000, 8, 1.0), positive="pos")
        w = dict(zip(exp.feature_names, exp.weights))
        assert w["x1"] > 0
        assert abs(w["x1"]) > 5 * abs(w["x2"])

    def test_constant_response(self, normal_data):
        p = FunctionPredictor(normal_data.schema, lambda r: "neg", ["pos", "neg"])
        exp = surrogate_explain(p, [0.0, 0.0], normal_data, blocks.SamplerConfig(200, 0, 1.0), positive="pos")
        assert exp.constant_response and exp.fidelity is None
        assert exp.weights == (0.0, 0.0)
        assert exp.intercept == 0.0

    def test_deterministic(self, mixed_data):
        d, y = mixed_data
        m = logistic_fit(d, y, epochs=100)
        cfg = blocks.SamplerConfig(300, 17, 1.0)
        a = surrogate_explain(m, d.row(3), d, cfg, positive="yes")
        b = surrogate_explain(m, d.row(3), d, cfg, positive="yes")
        assert a == b
        assert a.feature_names == ("x1", "x2", "colour=blue", "colour=green", "colour=red", "group=A", "group=B")
        assert a.as_dict()["seed"] == 17

    def test_bad_width(self, normal_data):
        with pytest.raises(errors.NonPositiveWidth):
            surrogate_explain(linear_box(normal_data.schema), [0.0, 0.0], normal_data, kernel_width=0.0, positive="pos")


def test_weighted_r2():
    assert weighted_r2([1, 2, 3], [1, 2, 3], [1, 1, 1]) == 1.0
    assert weighted_r2([2, 2], [1, 3], [1, 1]) is None
    assert weighted_r2([0, 2], [1, 1], [1, 1]) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.randoms(), st.integers(2, 8))
def test_pd_permutation_invariant_and_bounded(rnd, res):
    rng = np.random.default_rng(9)
    d = make_dataset({"x1": rng.normal(size=30) * 20, "x2": rng.normal(size=30)})
    p = linear_box(d.schema, 3.0, 1.0)
    perm = list(range(30))
    rnd.shuffle(perm)
    a = ice(p, d, "x1", res, "pos")
    b = ice(p, d.select_rows(perm), "x1", res, "pos")
    assert np.array_equal(b.curves, a.curves[perm])
    assert np.allclose(pd_from_ice(a).curve, pd_from_ice(b).curve, atol=1e-15)
    assert a.curves.min() >= 0.0 and a.curves.max() <= 1.0


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=10), st.floats(0.05, 2.0))
def test_halving_width_is_more_local(dists, width):
    near, far = min(dists), max(dists)
    wide = blocks.exponential_kernel(np.array([near, far]), width)
    narrow = blocks.exponential_kernel(np.array([near, far]), width / 2)
    # compare far/near ratios without dividing by an underflowed weight
    assert narrow[1] * wide[0] <= wide[1] * narrow[0] * (1 + 1e-12)
