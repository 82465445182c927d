import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eiregret.acquisition import (
    PHI0,
    EiQuery,
    IncumbentRule,
    IncumbentValue,
    compute_incumbent,
    ei_tradeoff,
    ei_values,
    expected_improvement,
    maximize_ei,
    std_normal_cdf,
    std_normal_pdf,
    tau,
)
from eiregret.gp import Dataset, PosteriorMoment, candidate_pool, fit, predict
from eiregret.kernels import KernelSpec

finite_z = st.floats(-30.0, 30.0)
exploit = st.floats(-5.0, 5.0)
explore = st.floats(1e-3, 1.0)


def random_model(rng, t=12, d=2, ell=None):
    data = Dataset(rng.random((t, d)), rng.normal(size=t))
    return fit(data, KernelSpec("matern32", ell or float(rng.uniform(0.1, 0.6))), 0.01)


def ei_of(model, xi, x):
    m, v = predict(model, np.atleast_2d(x))
    return ei_values(xi, m, np.sqrt(v))


def test_pdf_cdf_reference_values():
    assert std_normal_pdf(0.0) == pytest.approx(0.3989422804014327, abs=1e-15)
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(-1.0) == pytest.approx(0.15865525393145705, abs=1e-15)


def test_tau_reference_values():
    assert tau(0.0) == pytest.approx(PHI0, abs=1e-15)
    assert tau(-1.0) == pytest.approx(0.0833154705876863, abs=1e-14)
    assert tau(1.0) == pytest.approx(1.0833154705876863, abs=1e-14)


def test_ei_at_zero_exploitation():
    assert expected_improvement(0.3, PosteriorMoment(0.3, 1.0)) == pytest.approx(PHI0, abs=1e-15)


def test_ei_deterministic_limit():
    assert expected_improvement(1.0, PosteriorMoment(0.0, 0.0)) == 1.0
    assert expected_improvement(-1.0, PosteriorMoment(0.0, 1e-13)) == 0.0


def test_ei_negative_exploitation_matches_monte_carlo():
    ei = expected_improvement(0.0, PosteriorMoment(1.0, 1.0))
    assert ei == pytest.approx(0.0833154705876863, abs=1e-14)
    f = np.random.default_rng(0).normal(1.0, 1.0, 1_000_000)
    assert abs(ei - np.mean(np.maximum(-f, 0.0))) <= 3e-3


def test_ei_rejects_negative_std():
    with pytest.raises(ValueError):
        expected_improvement(0.0, PosteriorMoment(0.0, -1.0))


def test_tradeoff_reference():
    assert ei_tradeoff(0.0, 1.0) == pytest.approx(PHI0, abs=1e-15)


@pytest.mark.parametrize("b", [0.0, -0.5])
def test_tradeoff_rejects_nonpositive_b(b):
    with pytest.raises(ValueError):
        ei_tradeoff(0.1, b)


def test_tradeoff_identical_to_standard_form():
    rng = np.random.default_rng(1)
    a = rng.uniform(-3, 3, 1000)
    b = rng.uniform(1e-3, 1.0, 1000)
    for ai, bi in zip(a, b):
        assert ei_tradeoff(ai, bi) == expected_improvement(ai, PosteriorMoment(0.0, bi))


def test_ei_query_z():
    q = EiQuery(-0.3, 0.6)
    assert q.z * q.b == pytest.approx(q.a, rel=1e-15)


@settings(max_examples=200)
@given(a=exploit, b=explore)
def test_ei_forms_agree(a, b):
    std = expected_improvement(a, PosteriorMoment(0.0, b))
    ab = ei_tradeoff(a, b)
    st_ = b * tau(a / b)
    assert std == ab
    assert abs(std - st_) <= 1e-12 * max(abs(std), 1e-300)


@settings(max_examples=200)
@given(a=exploit, b=explore)
def test_ei_dominates_exploitation(a, b):
    ei = ei_tradeoff(a, b)
    assert ei >= 0.0
    assert ei >= a


@settings(max_examples=200)
@given(z=st.floats(-30.0, 5.0), b=st.floats(1e-3, 1.0 - 1e-4))
def test_ei_monotone_in_both_arguments(z, b):
    # beyond z ~ 5 the gain in b falls under double resolution
    eps = 1e-4
    a = z * b
    assert ei_tradeoff(a + eps, b) > ei_tradeoff(a, b)
    assert ei_tradeoff(a, b + eps) > ei_tradeoff(a, b)


@settings(max_examples=200)
@given(z=finite_z)
def test_tau_positive_and_derivative(z):
    assert tau(z) > 0
    h = 1e-5
    assert abs((tau(z + h) - tau(z - h)) / (2 * h) - std_normal_cdf(z)) <= 1e-6


@settings(max_examples=200)
@given(z=st.floats(1e-6, 30.0))
def test_cdf_exceeds_reflected_tau(z):
    assert std_normal_cdf(-z) > tau(-z)


def test_boi_incumbent():
    X = [[0.1, 0.1], [0.5, 0.5], [0.9, 0.2]]
    m = fit(Dataset(X, [3.2, -0.5, 1.1]), KernelSpec("se", 0.3), 0.01)
    inc = compute_incumbent(m, "boi")
    assert inc.xi_plus == -0.5
    np.testing.assert_array_equal(inc.arg_point, X[1])
    assert inc.rule is IncumbentRule.BOI


def test_bspmi_single_point():
    m = fit(Dataset([[0.4]], [2.0]), KernelSpec("se", 0.3), 0.25)
    inc = compute_incumbent(m, "bspmi")
    assert inc.xi_plus == pytest.approx(2.0 / 1.25, abs=1e-12)
    np.testing.assert_array_equal(inc.arg_point, [0.4])


def test_bpmi_requires_rng():
    m = fit(Dataset([[0.4]], [2.0]), KernelSpec("se", 0.3), 0.25)
    with pytest.raises(ValueError):
        compute_incumbent(m, "bpmi", 64)


def test_bpmi_below_bspmi_on_random_models():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = random_model(rng, t=int(rng.integers(1, 25)), d=int(rng.integers(1, 4)))
        bpmi = compute_incumbent(m, "bpmi", 512, rng)
        bspmi = compute_incumbent(m, "bspmi")
        assert bpmi.xi_plus <= bspmi.xi_plus


def test_bspmi_attained_at_sampled_point():
    rng = np.random.default_rng(3)
    m = random_model(rng)
    inc = compute_incumbent(m, "bspmi")
    mu, _ = predict(m, m.data.X)
    assert inc.xi_plus == mu.min()
    assert any(np.array_equal(inc.arg_point, x) for x in m.data.X)


def test_all_zero_ei_returns_first_candidate():
    rng = np.random.default_rng(4)
    m = random_model(rng)
    inc = IncumbentValue(-1e10, m.data.X[0], IncumbentRule.BOI)
    x = maximize_ei(m, inc, 64, np.random.default_rng(99))
    np.testing.assert_array_equal(x, candidate_pool(2, 64, np.random.default_rng(99))[0])


def test_maximize_ei_budget_validation():
    rng = np.random.default_rng(5)
    m = random_model(rng)
    with pytest.raises(ValueError):
        maximize_ei(m, compute_incumbent(m, "boi"), 0, rng)


def test_maximize_ei_beats_sampled_points():
    rng = np.random.default_rng(6)
    for _ in range(20):
        m = random_model(rng)
        inc = compute_incumbent(m, "bspmi")
        x = maximize_ei(m, inc, 256, rng)
        assert ei_of(m, inc.xi_plus, x)[0] >= ei_of(m, inc.xi_plus, m.data.X).max()


def test_maximize_ei_dense_grid_audit():
    rng = np.random.default_rng(7)
    g = np.linspace(0, 1, 144)
    grid = np.array(np.meshgrid(g, g)).reshape(2, -1).T  # ~10x the default 2-D pool
    for _ in range(10):
        m = random_model(rng, t=10)
        inc = compute_incumbent(m, "bpmi", 2048, rng)
        x = maximize_ei(m, inc, 2048, rng)
        assert ei_of(m, inc.xi_plus, x)[0] >= ei_of(m, inc.xi_plus, grid).max() - 1e-6


def test_maximize_ei_deterministic():
    rng = np.random.default_rng(8)
    m = random_model(rng)
    inc = compute_incumbent(m, "boi")
    a = maximize_ei(m, inc, 256, np.random.default_rng(1))
    b = maximize_ei(m, inc, 256, np.random.default_rng(1))
    np.testing.assert_array_equal(a, b)
    assert np.all((a >= 0) & (a <= 1))


def test_cdf_tail_accuracy():
    for z in (-5.0, -10.0, -20.0):
        ref = 0.5 * math.erfc(-z / math.sqrt(2))
        assert std_normal_cdf(z) == pytest.approx(ref, rel=1e-12)
