import numpy as np
import pytest

from levyheat import measure, symbol
from levyheat.frozen import GridError, SpaceTimeGrid, frozen_kernel
from levyheat.operator import (apply_L_eps, eigen_check, generator_on_test_functions,
                               lattice_multiplier, pde_residual, time_derivative)
from levyheat.oracle import cauchy_closed_form, cauchy_time_derivative
from levyheat.parametrix import heat_kernel

CAUCHY = measure.stable(1.0)
ONE = symbol.constant(1.0)


def test_lattice_multiplier_reproduces_exponent():
    g = SpaceTimeGrid(32.0, 1024, np.array([1.0]))
    M, _ = lattice_multiplier(CAUCHY, ONE.base, 0.0, g)
    k = slice(1, 200)
    np.testing.assert_allclose(M[k].real, -np.pi * g.xi[k], rtol=1e-6)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_plane_wave_eigenfunction(alpha):
    g = SpaceTimeGrid(32.0, 1024, np.array([1.0]))
    xi0 = g.xi[40]
    res = eigen_check(measure.stable(alpha), ONE, g, xi0)
    assert res < 1e-6 * (xi0 ** alpha)


def test_generator_of_cauchy_density():
    # ∂_t p = L p for the closed form, evaluated at an off-lattice point
    t = 1.0
    f = lambda x: cauchy_closed_form(t, x)
    for x in (0.0, 0.7, 3.0):
        Lp = apply_L_eps(CAUCHY, ONE, f, x)
        assert Lp == pytest.approx(float(cauchy_time_derivative(t, x)), rel=1e-6, abs=1e-9)


def test_truncation_matches_lattice_path():
    g = SpaceTimeGrid(32.0, 1024, np.array([1.0]))
    f = cauchy_closed_form(1.0, g.x)
    full = apply_L_eps(CAUCHY, ONE, f, None, 0.0, grid=g)
    cut = apply_L_eps(CAUCHY, ONE, f, None, 0.05, grid=g)
    # dropping |z| < eps removes at most ~ eps^2 sup|f''| ∫_{|z|<eps} nu ~ eps |f''|
    assert np.max(np.abs(full - cut)) < 0.05 * 2 * np.max(np.abs(np.gradient(np.gradient(f, g.dx), g.dx)))


def test_pde_residual_on_frozen_kernel():
    g = SpaceTimeGrid(32.0, 2048, np.linspace(0.25, 1.0, 49))
    k = heat_kernel(CAUCHY, ONE, g)[0]
    ts, r = pde_residual(CAUCHY, ONE, k, 0.01)
    assert len(ts) == 47
    assert np.max(np.abs(r)) < 5e-2


def test_time_derivative_needs_interior_nodes():
    times = np.array([0.1, 0.2, 0.4])
    vals = np.array([times ** 2]).T * np.ones((1, 3))
    d = time_derivative((times, vals), 0.2)
    np.testing.assert_allclose(d, 0.4, rtol=1e-12)
    with pytest.raises(GridError):
        time_derivative((times, vals), 0.1)
    with pytest.raises(GridError):
        time_derivative((times, vals), 0.3)


def test_semigroup_identity_for_smooth_data():
    g = SpaceTimeGrid(32.0, 1024, np.array([1.0]))
    f = np.exp(-g.x ** 2)
    assert generator_on_test_functions(CAUCHY, ONE, g, f, 0.5) < 1e-6
    assert generator_on_test_functions(CAUCHY, ONE, g, np.zeros(g.n), 0.5) == 0.0
