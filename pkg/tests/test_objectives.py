import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eiregret.objectives import (
    FUNCTIONS,
    NoiseModel,
    TestFunction,
    estimate_lipschitz,
    eval_objective,
    get_function,
    initial_design,
    observe,
)

# mpmath evaluations of the standardized formulas at the listed minimizers
REFERENCE_AT_OPTIMUM = {
    "branin2": -1.0473938910927866,
    "styblinski2": -1.5411186866707981,
}


@pytest.mark.parametrize("name, x, table", [
    ("branin2", (math.pi, 2.275), -1.05),
    ("hartmann6", (0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573), -8.059),
    ("styblinski2", (-2.9034, -2.9035), -1.54),
])
def test_table_values_at_optimum(name, x, table):
    assert eval_objective(get_function(name), x) == pytest.approx(table, abs=1e-2)


@pytest.mark.parametrize("name", sorted(REFERENCE_AT_OPTIMUM))
def test_high_precision_reference(name):
    fn = get_function(name)
    assert eval_objective(fn, fn.optima[0 if name != "branin2" else 1]) == pytest.approx(
        REFERENCE_AT_OPTIMUM[name], abs=1e-12)


def test_branin_three_optima_agree():
    fn = get_function("branin2")
    for x in fn.optima:
        assert eval_objective(fn, x) == pytest.approx(-1.05, abs=1e-2)


def test_camel_two_optima_agree():
    fn = get_function("camel2")
    for x in fn.optima:
        assert eval_objective(fn, x) == pytest.approx(-0.8049, abs=1e-2)


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_listed_optima_inside_box_and_match_f_star(name):
    fn = get_function(name)
    for x in fn.optima:
        x = np.asarray(x)
        assert np.all(x >= fn.lower) and np.all(x <= fn.bounds[:, 1])
        assert eval_objective(fn, x) == pytest.approx(fn.f_star, abs=1e-3)
    assert fn.f_star == pytest.approx(fn.table_f_star, abs=1e-2)


def test_schwefel_measured_minimum():
    assert get_function("schwefel2").f_star == pytest.approx(-3.0571, abs=1e-4)


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_standardized_over_box(name):
    fn = get_function(name)
    U = np.random.default_rng(0).random((100_000, fn.dim))
    v = fn.func(fn.from_unit(U))
    assert abs(v.mean()) <= 0.05
    assert abs(v.std() - 1.0) <= 0.1


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_f_star_is_a_lower_bound_on_samples(name):
    fn = get_function(name)
    U = np.random.default_rng(1).random((20_000, fn.dim))
    assert fn.func(fn.from_unit(U)).min() >= fn.f_star - 1e-9


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_objective(get_function("branin2"), [0.0, 1.0, 2.0])


def test_outside_box_clamped_or_rejected():
    fn = get_function("hartmann6")
    with pytest.warns(UserWarning):
        v = eval_objective(fn, [1.0 + 5e-10] + [0.5] * 5)
    assert v == eval_objective(fn, [1.0] + [0.5] * 5)
    with pytest.raises(ValueError):
        eval_objective(fn, [1.1] + [0.5] * 5)


def test_unknown_function():
    with pytest.raises(ValueError):
        get_function("ackley")


def test_noiseless_observation_exact():
    fn = get_function("branin2")
    x = [1.0, 2.0]
    assert observe(fn, x, NoiseModel(0.0, np.random.default_rng(0))) == eval_objective(fn, x)


def test_noise_mean_clt():
    fn = get_function("camel2")
    x = [0.5, -0.3]
    noise = NoiseModel(0.1, np.random.default_rng(2))
    ys = np.array([observe(fn, x, noise) for _ in range(100_000)])
    assert abs(ys.mean() - eval_objective(fn, x)) <= 3 * 0.1 / math.sqrt(100_000)


def test_noise_streams_reproducible():
    a = NoiseModel(0.1, np.random.default_rng(5))
    b = NoiseModel(0.1, np.random.default_rng(5))
    assert [a.draw() for _ in range(20)] == [b.draw() for _ in range(20)]


def test_initial_design_default_size():
    fn = get_function("branin2")
    X = initial_design(fn, 10 * fn.dim, np.random.default_rng(0))
    assert X.shape == (20, 2)
    assert np.all(X >= fn.lower) and np.all(X <= fn.bounds[:, 1])


def test_initial_design_deterministic_and_uniform():
    fn = get_function("rosenbrock4")
    X = initial_design(fn, 10_000, np.random.default_rng(3))
    np.testing.assert_array_equal(X, initial_design(fn, 10_000, np.random.default_rng(3)))
    mid = fn.lower + fn.width / 2
    se = fn.width / math.sqrt(12) / math.sqrt(10_000)
    assert np.all(np.abs(X.mean(axis=0) - mid) <= 3 * se)


def test_initial_design_rejects_empty():
    with pytest.raises(ValueError):
        initial_design(get_function("branin2"), 0, np.random.default_rng(0))


def test_lipschitz_constant_function_floor():
    fn = TestFunction("const", lambda x: np.zeros(x.shape[:-1]), [(0, 1)] * 3, ((0.5,) * 3,))
    assert estimate_lipschitz(fn, 1000, np.random.default_rng(0)) == pytest.approx(1 / 3)


def test_lipschitz_linear_function():
    fn = TestFunction("lin", lambda x: -2.5 * x[..., 0], [(0, 1), (0, 1)], ((1.0, 0.0),))
    L = estimate_lipschitz(fn, 20_000, np.random.default_rng(1))
    assert 2.3 <= L <= 2.5 + 1e-12


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 500), extra=st.integers(1, 500))
def test_lipschitz_running_max(n, extra):
    fn = get_function("camel2")
    a = estimate_lipschitz(fn, n, np.random.default_rng(11))
    b = estimate_lipschitz(fn, n + extra, np.random.default_rng(11))
    assert b >= a


@settings(max_examples=50, deadline=None)
@given(name=st.sampled_from(sorted(FUNCTIONS)), seed=st.integers(0, 2**32 - 1))
def test_unit_box_round_trip(name, seed):
    fn = get_function(name)
    u = np.random.default_rng(seed).random(fn.dim)
    np.testing.assert_allclose(fn.to_unit(fn.from_unit(u)), u, atol=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert math.isfinite(eval_objective(fn, fn.from_unit(u)))
