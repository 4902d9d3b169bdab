import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma as G

from heisenlab.fractional import (
    FracScheme,
    TimeSeries,
    abel_weights,
    integration_by_parts_defect,
    memory_term,
    rl_derivative_left,
    rl_derivative_right,
    rl_integral_left,
    rl_integral_right,
    w1_exact,
)


@given(st.floats(0.0, 0.99), st.floats(1e-3, 1.0), st.integers(1, 10_000))
def test_weights_telescope(g, dt, k):
    w = FracScheme(g, dt, k).weights
    exact = (k * dt) ** (1 - g) / (1 - g)
    assert abs(w[1:].sum() - exact) <= 1e-12 * max(1.0, exact)


@given(st.floats(0.01, 0.99))
def test_weights_positive_decreasing(g):
    w = abel_weights(g, 0.1, 200)
    assert w[0] == 0.0
    assert np.all(w[1:] > 0)
    assert np.all(np.diff(w[1:]) < 0)


def test_weights_gamma_zero_are_dt():
    assert np.allclose(abel_weights(0.0, 0.05, 50)[1:], 0.05, rtol=1e-13)


def test_scheme_row_and_readonly():
    s = FracScheme(0.5, 0.1, 10)
    assert s.alpha == 0.5
    assert np.array_equal(s.row(3), s.weights[[3, 2, 1]])
    assert s.row(0).size == 0
    assert s.times()[-1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        s.weights[1] = 0.0
    with pytest.raises(IndexError):
        s.row(11)
    with pytest.raises(ValueError):
        FracScheme(1.0, 0.1, 10)
    with pytest.raises(ValueError):
        FracScheme(0.5, 0.0, 10)


@pytest.mark.parametrize("a", [0.3, 0.5, 0.8])
def test_integral_of_constant_is_exact(a):
    f = TimeSeries.sample(np.ones_like, 2.0, 400)
    t = f.times()
    assert np.allclose(rl_integral_left(f, a).values, t**a / G(a + 1), rtol=1e-12, atol=1e-15)
    assert np.allclose(rl_integral_right(f, a).values, (2.0 - t) ** a / G(a + 1), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("a, beta", [(0.5, 1.0), (0.3, 2.0)])
def test_integral_of_power_first_order(a, beta):
    errs = []
    for K in (500, 1000):
        f = TimeSeries.sample(lambda t: t**beta, 1.0, K)
        t = f.times()
        ex = G(beta + 1) / G(beta + 1 + a) * t ** (beta + a)
        errs.append(np.max(np.abs(rl_integral_left(f, a).values - ex)))
    assert errs[1] < 1e-2
    assert 1.7 <= errs[0] / errs[1] <= 2.3


@pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
def test_left_derivative_of_square(a):
    f = TimeSeries.sample(lambda t: t**2, 1.0, 2000)
    t = f.times()
    m = (t >= 0.1) & (t <= 0.9)
    ex = 2 / G(3 - a) * t ** (2 - a)
    assert np.max(np.abs(rl_derivative_left(f, a).values[m] - ex[m])) < 5e-3


@pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
def test_right_derivative_converges(a):
    T, sigma = 2.0, 3.0
    errs = []
    for K in (1024, 2048):
        f = TimeSeries.sample(lambda t: (1 - t / T) ** sigma, T, K)
        t = f.times()
        m = (t >= 0.1 * T) & (t <= 0.9 * T)
        ex = w1_exact(t[m], T, sigma, a)
        errs.append(np.max(np.abs(rl_derivative_right(f, a).values[m] - ex) / np.abs(ex)))
    assert errs[1] < 2e-2
    assert 1.7 <= errs[0] / errs[1] <= 2.3


def test_w1_closed_forms():
    # D^{1+a} w_1 is -d/dt of D^a w_1
    T, sigma, a = 2.0, 3.0, 0.4
    t = np.linspace(0.2, 1.8, 9)
    h = 1e-5
    num = -(w1_exact(t + h, T, sigma, a) - w1_exact(t - h, T, sigma, a)) / (2 * h)
    assert np.allclose(w1_exact(t, T, sigma, a, "one_plus_alpha"), num, rtol=1e-7)
    with pytest.raises(ValueError):
        w1_exact(2.5, T, sigma, a)
    with pytest.raises(ValueError):
        w1_exact(1.0, T, 1.2, a, "one_plus_alpha")
    with pytest.raises(ValueError):
        w1_exact(1.0, T, sigma, a, "two")


def test_roundtrip_and_parts():
    f = TimeSeries.sample(lambda t: t, 1.0, 4096)
    back = rl_derivative_left(rl_integral_left(f, 0.5), 0.5).values
    m = (f.times() >= 0.1) & (f.times() <= 0.9)
    assert np.max(np.abs(back[m] - f.values[m])) < 1e-3
    T = 2.0
    g = TimeSeries.sample(lambda s: np.sin(np.pi * s / T) ** 2, T, 4096)
    assert integration_by_parts_defect(g, g, 0.5) < 1e-3
    w = TimeSeries.sample(lambda s: (1 - s / T) ** 3, T, 4096)
    exact = w1_exact(w.times(), T, 3.0, 0.5)
    assert integration_by_parts_defect(w, g, 0.5, exact) < 1e-3
    with pytest.raises(ValueError):
        integration_by_parts_defect(w, TimeSeries.sample(np.sin, T, 100), 0.5)


def test_vector_valued_series_matches_scalar():
    rng = np.random.default_rng(3)
    v = rng.normal(size=(60, 3, 2))
    s = TimeSeries(0.1, v)
    out = rl_integral_left(s, 0.4).values
    for i in range(3):
        for j in range(2):
            ref = rl_integral_left(TimeSeries(0.1, v[:, i, j]), 0.4).values
            assert np.allclose(out[:, i, j], ref, atol=1e-13)


def test_series_validation():
    with pytest.raises(ValueError):
        TimeSeries(0.1, [1.0])
    with pytest.raises(ValueError):
        TimeSeries(0.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        rl_integral_left(TimeSeries(0.1, [1.0, 2.0]), 1.0)


def test_memory_term_constant_history():
    s = FracScheme(0.5, 0.1, 20)
    hist = np.ones((20, 4))
    for k in (1, 7, 20):
        assert np.allclose(memory_term(hist, s, k), 2 * np.sqrt(0.1 * k), rtol=1e-13)
    assert not memory_term(hist, s, 0).any()


def test_memory_term_gamma_zero_is_cumulative():
    rng = np.random.default_rng(0)
    hist = rng.normal(size=(30, 5))
    s = FracScheme(0.0, 0.2, 30)
    cum = 0.2 * np.cumsum(hist, axis=0)
    for k in range(1, 31):
        assert np.allclose(memory_term(hist, s, k), cum[k - 1], atol=1e-12)


def test_memory_term_example():
    # k=2: w_{2,0} = b_2, w_{2,1} = b_1 with b_m = dt^{1/2}(sqrt m - sqrt(m-1))/(1/2)
    s = FracScheme(0.5, 0.25, 4)
    hist = np.array([[1.0], [10.0]])
    b1, b2 = 2 * 0.5 * 1.0, 2 * 0.5 * (np.sqrt(2) - 1)
    assert memory_term(hist, s, 2)[0] == pytest.approx(b2 * 1.0 + b1 * 10.0, rel=1e-14)
    with pytest.raises(ValueError):
        memory_term(hist, s, 3)
    with pytest.raises(IndexError):
        memory_term(hist, s, 5)
