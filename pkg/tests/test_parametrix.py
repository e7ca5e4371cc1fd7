import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyheat import measure, symbol
from levyheat.frozen import GridError, SpaceTimeGrid
from levyheat.parametrix import (ParametrixEngine, build_mesh, chebyshev_nodes, choose_beta1, choose_M,
                                 heat_kernel, lagrange_general, lagrange_weights,
                                 legendre_family_nodes, q0_pointwise)

CAUCHY = measure.stable(1.0)


@pytest.fixture(scope="module")
def engine():
    g = SpaceTimeGrid(16.0, 512, np.linspace(0.125, 1.0, 8))
    return ParametrixEngine(CAUCHY, symbol.tanh_ramp(amp=0.25).periodized(16.0), g)


@pytest.fixture(scope="module")
def kernel(engine):
    return engine.kernel(0.0)


def test_mesh_contains_report_nodes():
    report = np.array([0.1, 0.25, 1.0])
    mesh, idx = build_mesh(report, 1 / 64, 1.05, 1e-5)
    np.testing.assert_array_equal(mesh[idx], report)
    assert mesh[0] == 0.0 and np.all(np.diff(mesh) > 0)
    assert np.max(np.diff(mesh)) <= 1 / 64 + 1e-15
    # geometric grading below the first report node
    inner = mesh[1: idx[0] + 1]
    assert np.all(inner[1:] / inner[:-1] <= 1.05 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 14), st.floats(-1, 1))
def test_lagrange_reproduces_polynomials(K, theta):
    rng = np.random.default_rng(K)
    coef = rng.standard_normal(K)
    for nodes, ell in ((chebyshev_nodes(-1, 1, K), lagrange_weights),
                       (legendre_family_nodes(-1, 1, K), lagrange_general)):
        w = ell(nodes, np.array([theta]))[:, 0]
        assert np.sum(w * np.polyval(coef, nodes)) == pytest.approx(np.polyval(coef, theta), abs=1e-10)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_lagrange_at_a_node_is_cardinal():
    nodes = chebyshev_nodes(0.0, 2.0, 6)
    w = lagrange_weights(nodes, nodes[2])
    np.testing.assert_array_equal(w, np.eye(6)[2])


def test_exponent_choices():
    c = symbol.tanh_ramp(beta=0.99)
    assert choose_beta1(c, 1.0) == pytest.approx(0.9)
    assert choose_M(0.9, 1.0) == pytest.approx(0.05)
    assert choose_beta1(symbol.tanh_ramp(beta=0.3), 1.5) == pytest.approx(0.3)


def test_variable_kernel_conserves_mass(kernel):
    np.testing.assert_allclose(kernel.row_mass(), 1.0, atol=5e-3)
    assert kernel.values.min() > -1e-9


def test_series_converges_geometrically(kernel):
    sups = kernel.table.sup_norms
    assert len(sups) >= 3
    assert sups[-1] < sups[1]
    assert kernel.table.truncation_bound < 1e-6 * np.max(np.abs(kernel.table.q))


def test_integral_equation_residual(engine, kernel):
    assert engine.integral_equation_residual(kernel.table, 0.0, [0.25, 1.0]) < 5e-6


def test_q0_agrees_with_pointwise_quadrature(engine):
    g = engine.grid
    q = engine.q0_delta(0.0, 0.5)
    for x in (-1.0, 0.5, 2.0):
        ref = q0_pointwise(CAUCHY, engine.coeff, 0.5, x, 0.0, grid=g)
        assert q[g.index_of(x)] == pytest.approx(ref, rel=1e-3, abs=1e-8)


def test_kernel_between_frozen_extremes(kernel):
    # for a monotone ramp the solution at y = 0 sits near the frozen kernel there
    gap = np.max(np.abs(kernel.phi)) / np.max(kernel.frozen)
    assert 0 < gap < 0.1


def test_constant_coefficient_engine_matches_frozen():
    g = SpaceTimeGrid(16.0, 512, np.linspace(0.25, 1.0, 4))
    eng = ParametrixEngine(CAUCHY, symbol.constant(1.1), g)
    hk = eng.kernel(0.0)
    ref = heat_kernel(CAUCHY, symbol.constant(1.1), g)[0]
    assert np.max(np.abs(hk.values - ref.values)) < 1e-10
    assert np.max(np.abs(hk.phi)) == 0.0


def test_engine_rejects_line_and_planar_grids():
    c = symbol.tanh_ramp()
    with pytest.raises(GridError):
        ParametrixEngine(CAUCHY, c, SpaceTimeGrid(16.0, 64, np.array([1.0]), geometry="line"))
    with pytest.raises(GridError):
        ParametrixEngine(measure.stable(1.0, 2), symbol.tanh_ramp(d=2),
                         SpaceTimeGrid(16.0, 64, np.array([1.0]), dimension=2))


def test_inadmissible_case_rejected():
    with pytest.raises(measure.InadmissibleCaseError):
        ParametrixEngine(CAUCHY, symbol.tanh_ramp().periodized(16.0),
                         SpaceTimeGrid(16.0, 256, np.array([1.0])), "P1")
