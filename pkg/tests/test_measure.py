import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyheat import measure
from levyheat.oracle import stable_closed_forms
from levyheat.verify import bound_function_integral

CAUCHY = measure.stable(1.0)


def test_scale_functions_at_one():
    assert measure.h_of(CAUCHY, 1.0) == pytest.approx(4.0, rel=1e-10)
    assert measure.K_of(CAUCHY, 1.0) == pytest.approx(2.0, rel=1e-10)
    p = measure.stable(1.5)
    assert measure.h_of(p, 1.0) == pytest.approx(16.0 / 3.0, rel=1e-10)
    assert measure.K_of(p, 1.0) == pytest.approx(4.0, rel=1e-10)


@pytest.mark.parametrize("alpha,d", [(0.5, 1), (1.0, 1), (1.7, 1), (1.0, 2), (1.5, 2)])
def test_scale_functions_match_power_law(alpha, d):
    p = measure.stable(alpha, d)
    r = np.logspace(-3, 3, 7)
    h, K, _ = stable_closed_forms(alpha, d, r)
    np.testing.assert_allclose(measure.h_of(p, r), h, rtol=1e-9)
    np.testing.assert_allclose(measure.K_of(p, r), K, rtol=1e-9)


def test_bound_function_values():
    assert measure.bound_rho(CAUCHY, 1.0, 0.0) == pytest.approx(0.25, rel=1e-9)
    assert measure.bound_rho(CAUCHY, 1.0, 10.0) == pytest.approx(0.02, rel=1e-6)
    assert measure.err_fn(CAUCHY, 0.0, 1.0, 1.0, 0.5) == pytest.approx(0.125, rel=1e-9)
    assert measure.rho_crossover(CAUCHY, 1.0) == pytest.approx(math.sqrt(8.0), rel=1e-8)


def test_bound_function_integral_closed_value():
    # the two branches meet at sqrt(8) t, giving 2 sqrt(2) for every t
    for t in (0.1, 1.0, 10.0):
        q, closed = bound_function_integral(CAUCHY, t)
        assert q == pytest.approx(2 * math.sqrt(2), rel=1e-8)
        assert closed == pytest.approx(2 * math.sqrt(2), rel=1e-8)


@pytest.mark.parametrize("family", ["stable", "log"])
@pytest.mark.parametrize("d", [1, 2])
def test_bound_function_integral_interval(family, d):
    p = measure.make_profile(family, 1.0, d)
    lo, hi = measure.OMEGA[d] / 2, measure.OMEGA[d] / 2 * (1 + 2 / d)
    for t in (0.1, 1.0, 10.0):
        q, _ = bound_function_integral(p, t)
        assert lo <= q <= hi


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4), st.floats(0.2, 1.8))
def test_h_inverse_roundtrip(log_u, alpha):
    p = measure.stable(alpha)
    u = 10.0 ** log_u
    r = measure.h_inverse(p, u)
    assert measure.h_of(p, r) == pytest.approx(u, rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 4), st.floats(0.01, 3.0), st.sampled_from(["stable", "truncated_stable",
                                                                   "tempered_stable", "log"]))
def test_h_decreasing_and_dominates_K(log_r, factor, family):
    p = measure.make_profile(family, 1.2)
    r = 10.0 ** log_r
    h1, h2 = measure.h_of(p, np.array([r, r * (1 + factor)]))
    assert h1 > h2
    assert measure.K_of(p, r) <= h1 * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 1), st.floats(-3, 3))
def test_bound_function_monotone_in_radius(log_t, log_r):
    t, r = 10.0 ** log_t, 10.0 ** log_r
    a, b = measure.rho_radial(CAUCHY, t, np.array([r, 2 * r]))
    assert b <= a * (1 + 1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_certificate_for_stable(alpha):
    cert = measure.estimate_scaling(measure.stable(alpha))
    assert cert.alpha_h == pytest.approx(alpha, abs=0.011)
    assert cert.C_h == pytest.approx(1.0, abs=2e-3)
    assert cert.beta_h == pytest.approx(alpha, abs=0.011)
    assert cert.fit_residual < 1e-2


def test_certificate_for_log_profile():
    cert = measure.estimate_scaling(measure.log_profile(1.0))
    assert 0.0 < cert.alpha_h < 1.0
    assert cert.C_h >= 1.0


def test_stretched_certificate():
    cert = measure.estimate_scaling(CAUCHY)
    wide = cert.stretched(4 * cert.theta_h)
    assert wide.theta_h == 4 * cert.theta_h
    assert wide.C_h == pytest.approx(16 * cert.C_h)
    assert cert.stretched(cert.theta_h / 2) is cert


def test_case_admissibility():
    cert = measure.estimate_scaling(CAUCHY)
    measure.validate_case("P3", cert, CAUCHY)
    with pytest.raises(measure.InadmissibleCaseError):
        measure.validate_case("P1", cert, CAUCHY)
    skew = measure.with_skew(CAUCHY, 0.5)
    with pytest.raises(measure.InadmissibleCaseError):
        measure.validate_case("P3", cert, skew)
    measure.validate_case("P1", measure.estimate_scaling(measure.stable(1.5)), measure.stable(1.5))
    with pytest.raises(measure.InadmissibleCaseError):
        measure.validate_case("P4", cert, CAUCHY)


def test_skewed_density():
    p = measure.with_skew(measure.stable(0.5), 0.5)
    assert p.comparability == pytest.approx(2.0)
    assert p.J(np.array([2.0]))[0] == pytest.approx(1.5 * 2.0 ** -1.5)
    assert p.J(np.array([-2.0]))[0] == pytest.approx(0.5 * 2.0 ** -1.5)
    measure.check_profile(p)
    with pytest.raises(ValueError):
        measure.with_skew(measure.stable(1.0, 2), 0.1)


def test_profile_construction_errors():
    with pytest.raises(ValueError):
        measure.stable(2.0)
    with pytest.raises(ValueError):
        measure.make_profile("gaussian", 1.0)
    with pytest.raises(ValueError):
        measure.h_of(CAUCHY, 0.0)
    with pytest.raises(ValueError):
        measure.h_inverse(CAUCHY, -1.0)
    with pytest.raises(ValueError):
        measure.bound_rho(CAUCHY, 0.0, 1.0)


def test_truncated_profile_has_compact_support():
    p = measure.truncated_stable(1.0, 2.0)
    assert p.nu(np.array([3.0]))[0] == 0.0
    assert measure.tail_mass(p, 2.5) == 0.0
    # above the cut-off, h(r) = r^-2 times the full second moment
    assert measure.h_of(p, 4.0) == pytest.approx(measure.second_moment(p, 2.0) / 16.0, rel=1e-9)


def test_comparability_parameter_is_the_constant():
    p = measure.make_profile("stable", 0.5, comparability=1.6)
    assert p.comparability == pytest.approx(1.6)
    measure.check_profile(p)
