import numpy as np
import pytest

from levyheat import measure, symbol
from levyheat.frozen import (AliasingError, GridError, KernelCache, SpaceTimeGrid, delta_increment,
                             frozen_gradient, frozen_kernel, frozen_time_derivative,
                             kernel_kappa_sensitivity, load_field)
from levyheat.oracle import cauchy_closed_form, cauchy_gradient, cauchy_time_derivative

CAUCHY = measure.stable(1.0)
ONE = symbol.constant(1.0)


@pytest.fixture(scope="module")
def line_kernel():
    g = SpaceTimeGrid(32.0, 1024, np.array([0.25, 0.5, 1.0]), geometry="line")
    return frozen_kernel(CAUCHY, ONE, 0.0, g)


def test_line_kernel_matches_cauchy(line_kernel):
    g = line_kernel.grid
    m = np.abs(g.x) <= 8
    for i, t in enumerate(g.times):
        exact = cauchy_closed_form(t, g.x[m])
        assert np.max(np.abs(line_kernel.values[i, m] / exact - 1)) < 1e-6


def test_line_mass_including_tail(line_kernel):
    total = line_kernel.mass() + line_kernel.meta["outside_mass"]
    np.testing.assert_allclose(total, 1.0, atol=1e-6)
    # the cropped box alone misses about 2t/(pi L) of Cauchy mass
    np.testing.assert_allclose(line_kernel.meta["outside_mass"],
                               2 / np.pi * np.arctan(np.pi * line_kernel.times / 32.0), rtol=0.02)


def test_torus_mass_is_one():
    g = SpaceTimeGrid(16.0, 512, np.array([0.2, 0.6, 1.5]))
    for p in (CAUCHY, measure.stable(1.5), measure.tempered_stable(1.2)):
        kf = frozen_kernel(p, symbol.constant(1.2), 0.0, g)
        np.testing.assert_allclose(kf.mass(), 1.0, atol=1e-12)


def test_constant_level_rescales_time():
    g = SpaceTimeGrid(32.0, 1024, np.array([0.5]), geometry="line")
    kf = frozen_kernel(CAUCHY, symbol.constant(2.0), 0.0, g)
    m = np.abs(g.x) <= 8
    np.testing.assert_allclose(kf.values[0, m], cauchy_closed_form(1.0, g.x[m]), rtol=1e-6)


def test_spectral_derivatives(line_kernel):
    g = line_kernel.grid
    m = (np.abs(g.x) <= 8) & (np.abs(g.x) > 0.5)
    grad = frozen_gradient(line_kernel, 1)
    dt = frozen_time_derivative(line_kernel)
    i = 2
    np.testing.assert_allclose(grad.values[i, m], cauchy_gradient(1.0, g.x[m]), rtol=1e-4, atol=1e-9)
    np.testing.assert_allclose(dt.values[i, m], cauchy_time_derivative(1.0, g.x[m]), rtol=1e-4, atol=1e-9)


def test_increments_by_case(line_kernel):
    z = np.array([0.1, 0.3])
    sym = delta_increment(line_kernel, "P3", 2, 0.0, 1.0, z)
    u = 1.0
    exact = 0.5 * (cauchy_closed_form(1.0, u - z) + cauchy_closed_form(1.0, u + z)) - cauchy_closed_form(1.0, u)
    np.testing.assert_allclose(sym, exact, rtol=1e-5)
    one_sided = delta_increment(line_kernel, "P2", 2, 0.0, 1.0, z)
    np.testing.assert_allclose(one_sided, cauchy_closed_form(1.0, u - z) - cauchy_closed_form(1.0, u), rtol=1e-5)
    with pytest.raises(ValueError):
        delta_increment(line_kernel, "P9", 2, 0.0, 1.0, z)


def test_planar_torus_kernel_mass():
    g = SpaceTimeGrid(16.0, 128, np.array([0.5, 1.0]), dimension=2)
    kf = frozen_kernel(measure.stable(1.0, 2), symbol.constant(1.0, 2), np.array([0.0, 0.0]), g)
    np.testing.assert_allclose(kf.mass(), 1.0, atol=1e-10)
    assert kf.values.min() >= -1e-9


def test_aliasing_and_grid_errors():
    g = SpaceTimeGrid(32.0, 64, np.array([0.01, 1.0]))
    with pytest.raises(AliasingError):
        frozen_kernel(CAUCHY, ONE, 0.0, g)
    with pytest.raises(GridError):
        SpaceTimeGrid(32.0, 100, np.array([1.0]))
    with pytest.raises(GridError):
        SpaceTimeGrid(32.0, 64, np.array([1.0, 0.5]))
    with pytest.raises(GridError):
        SpaceTimeGrid(32.0, 64, np.array([1.0]), dimension=2, geometry="line")
    g = SpaceTimeGrid(4.0, 512, np.array([1.0]))
    with pytest.raises(GridError):
        g.check(CAUCHY, ONE)
    with pytest.raises(GridError):
        g.time_index(0.3)
    with pytest.raises(GridError):
        g.index_of(0.001)


def test_snapshot_roundtrip(tmp_path, line_kernel):
    path = tmp_path / "k.bin"
    line_kernel.save(path)
    back = load_field(path, geometry="line")
    np.testing.assert_array_equal(back.values, line_kernel.values)
    np.testing.assert_array_equal(back.times, line_kernel.times)
    assert back.grid.L == line_kernel.grid.L


def test_kappa_sensitivity_is_finite():
    g = SpaceTimeGrid(16.0, 512, np.array([0.25, 1.0]))
    s = kernel_kappa_sensitivity(CAUCHY, symbol.constant(1.0), symbol.constant(1.1), 0.0, g)
    assert 0 < s < 10
    assert kernel_kappa_sensitivity(CAUCHY, ONE, ONE, 0.0, g) == 0.0


def test_kernel_cache_is_write_once():
    g = SpaceTimeGrid(16.0, 256, np.array([0.5]))
    cache = KernelCache(CAUCHY, symbol.tanh_ramp().periodized(16.0), g)
    cache.fill([3, 7])
    first = cache.get(3)
    cache.fill([3])
    assert cache.get(3) is first and 7 in cache
    with pytest.raises(KeyError):
        cache.get(4)


def test_torus_kernel_matches_wrapped_cauchy():
    from levyheat.oracle import cauchy_periodic
    g = SpaceTimeGrid(16.0, 512, np.array([0.25, 1.0]))
    kf = frozen_kernel(CAUCHY, ONE, 0.0, g)
    for i, t in enumerate(g.times):
        np.testing.assert_allclose(kf.values[i], cauchy_periodic(t, g.x, 32.0), rtol=1e-8)
