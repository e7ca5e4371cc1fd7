import math

import numpy as np
import pytest
from scipy import integrate

from levyheat import measure, oracle, symbol
from levyheat.frozen import GridError, SpaceTimeGrid
from levyheat.parametrix import heat_kernel

CAUCHY = measure.stable(1.0)


def test_cauchy_density_integrates_to_one():
    for t in (0.1, 1.0, 3.0):
        total, _ = integrate.quad(lambda x: oracle.cauchy_closed_form(t, x), -np.inf, np.inf)
        assert total == pytest.approx(1.0, rel=1e-10)


def test_cauchy_derivatives_by_differences():
    t, x, e = 0.7, 1.3, 1e-5
    f = oracle.cauchy_closed_form
    assert oracle.cauchy_gradient(t, x) == pytest.approx((f(t, x + e) - f(t, x - e)) / (2 * e), rel=1e-7)
    assert oracle.cauchy_time_derivative(t, x) == pytest.approx((f(t + e, x) - f(t - e, x)) / (2 * e), rel=1e-7)


def test_stable_constants():
    assert oracle.stable_constant(1.0, 1) == math.pi
    assert oracle.stable_constant(1.0, 2) == pytest.approx(2 * math.pi, rel=1e-14)
    # alpha = 1/2: 2 Gamma(1/2) cos(pi/4) / (1/2) = 2 sqrt(2 pi)
    assert oracle.stable_constant(0.5, 1) == pytest.approx(2 * math.sqrt(2 * math.pi), rel=1e-14)
    with pytest.raises(ValueError):
        oracle.stable_constant(1.0, 3)
    with pytest.raises(ValueError):
        oracle.stable_closed_forms(2.0, 1, 1.0)


def test_convolutions_agree():
    rng = np.random.default_rng(1)
    f, g = rng.standard_normal(64), rng.standard_normal(64)
    np.testing.assert_allclose(oracle.riemann_convolution(f, g, 0.1), oracle.spectral_convolution(f, g, 0.1),
                               atol=1e-12)


def test_dp45_exponential_decay():
    y, info = oracle.dp45(lambda u: -2.0 * u, np.array([1.0, 3.0]), 1.5, rtol=1e-10)
    np.testing.assert_allclose(y, np.array([1.0, 3.0]) * math.exp(-3.0), rtol=1e-8)
    assert info["steps"] > 0


def test_dp45_step_budget():
    with pytest.raises(oracle.StiffnessError):
        oracle.dp45(lambda u: -1e6 * u, np.array([1.0]), 1.0, max_steps=50)


def test_mol_reproduces_constant_coefficient_semigroup():
    times = np.array([0.5, 0.75])
    g = SpaceTimeGrid(32.0, 512, times)
    k = heat_kernel(CAUCHY, symbol.constant(1.0), g)[0]
    got = oracle.mol_evolve(CAUCHY, symbol.constant(1.0), k.values[0], 0.25, g)
    assert np.max(np.abs(got - k.values[1])) / k.values[1].max() < 1e-4


def test_dense_operator_annihilates_constants():
    g = SpaceTimeGrid(16.0, 256, np.array([1.0]))
    A = oracle.assemble_operator(CAUCHY, symbol.tanh_ramp().periodized(16.0), g)
    assert np.max(np.abs(A @ np.ones(g.n))) < 1e-10
    with pytest.raises(GridError):
        oracle.assemble_operator(CAUCHY, symbol.constant(1.0), g, max_n=128)


def test_wrapped_cauchy_density():
    x = np.linspace(-8, 8, 33)
    m = np.arange(-100000, 100001)[:, None]
    direct = np.sum(oracle.cauchy_closed_form(0.5, x[None, :] + 16.0 * m), axis=0)
    np.testing.assert_allclose(oracle.cauchy_periodic(0.5, x, 16.0), direct, rtol=1e-5)
    total, _ = integrate.quad(lambda u: oracle.cauchy_periodic(0.5, u, 16.0), -8, 8)
    assert total == pytest.approx(1.0, rel=1e-10)
