import json
import math
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyheat import measure, symbol, verify
from levyheat.frozen import GridError, SpaceTimeGrid
from levyheat.parametrix import heat_kernel

CAUCHY = measure.stable(1.0)


@pytest.fixture(scope="module")
def cauchy_pair():
    times = np.array([0.125, 0.25, 0.375, 0.5])
    fine = heat_kernel(CAUCHY, symbol.constant(1.0), SpaceTimeGrid(32.0, 2048, times))[0]
    coarse = heat_kernel(CAUCHY, symbol.constant(1.0), SpaceTimeGrid(32.0, 1024, times))[0]
    return coarse, fine


@settings(max_examples=60)
@given(st.floats(0, 10), st.floats(0, 10))
def test_pass_iff_residual_within_tolerance(residual, tol):
    c = verify.Check("x", "a", None, residual, tol)
    assert c.passed == (residual <= tol)
    assert c.record()["pass"] == c.passed


def test_non_finite_residuals_fail_and_serialize():
    for bad in (math.inf, math.nan):
        c = verify.Check("x", "a", bad, bad, 1.0)
        assert not c.passed
        rec = c.record()
        assert rec["residual"] == sys.float_info.max and rec["constant"] is None
        json.dumps(rec, allow_nan=False)


def test_empty_report_is_an_error():
    with pytest.raises(ValueError):
        verify.build_report([])


def test_report_serialization_is_idempotent(tmp_path):
    checks = [verify.Check("a", "x", 1.5, 0.1, 0.2), verify.Check("b", "y", None, 0.3, 0.2)]
    p1, p2 = tmp_path / "1.json", tmp_path / "2.json"
    verify.emit_report(checks, {"k": 1}, 7, {"z": np.float64(2.0)}, p1)
    rep = json.loads(p1.read_text())
    assert rep["summary"] == {"pass": 1, "fail": 1}
    assert [set(c) for c in rep["checks"]] == [{"check", "anchor", "constant", "residual", "tol", "pass"}] * 2
    verify.emit_report(checks, {"k": 1}, 7, {"z": 2.0}, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_run_checks_keeps_job_order():
    import time

    def job(i, wait):
        def run():
            time.sleep(wait)
            return verify.Check(str(i), "", None, 0.0, 1.0)
        return run

    out = verify.run_checks([job(0, 0.05), job(1, 0.0), job(2, 0.02)], threads=3)
    assert [c.name for c in out] == ["0", "1", "2"]


def test_bound_constants_for_cauchy(cauchy_pair):
    _, fine = cauchy_pair
    g = fine.grid
    k = g.time_index(0.5)
    # at the target the periodized density is sum_m t/((pi t)^2 + (2Lm)^2); against
    # rho_t(0) = 1/(4t) its m = 0 term alone gives 4/pi^2
    m = np.arange(-200000, 200001)
    periodic = float(np.sum(0.5 / ((np.pi * 0.5) ** 2 + (2 * g.L * m) ** 2)))
    ratio0 = fine.values[k, g.index_of(0.0)] / measure.bound_rho(CAUCHY, 0.5, 0.0)
    assert ratio0 == pytest.approx(4 * 0.5 * periodic, rel=1e-6)
    assert ratio0 == pytest.approx(4 / math.pi ** 2, rel=3e-3)
    # the sup sits at the antipode, where the periodized density is about
    # (pi^2/4) t / L^2 against rho_t = 2t / L^2
    c = verify.bound_constants(fine, CAUCHY, 0.5)
    assert c["c_upper"] == pytest.approx(math.pi ** 2 / 8, rel=1e-3)
    assert 0 < c["c_lower"] <= c["c_upper"]


def test_constant_kernel_passes_core_checks(cauchy_pair):
    coarse, fine = cauchy_pair
    assert verify.check_mass(fine, 5e-3).passed
    assert verify.check_chapman_kolmogorov(fine, 0.125, 0.25, 1e-3).passed
    assert verify.check_nonnegativity(fine, 1e-9).passed
    assert verify.check_two_sided_bounds(coarse, fine, CAUCHY).passed
    assert verify.check_holder(coarse, fine, CAUCHY, [0.25, 0.5]).passed
    assert verify.check_gradient(coarse, fine, CAUCHY).passed


def test_chapman_kolmogorov_needs_grid_times(cauchy_pair):
    with pytest.raises(GridError):
        verify.check_chapman_kolmogorov(cauchy_pair[1], 0.1, 0.2, 1e-3)


def test_negative_controls_fail_their_checks(cauchy_pair):
    coarse, fine = cauchy_pair
    inner = verify.check_two_sided_bounds(verify.shuffled(coarse), verify.shuffled(fine), CAUCHY)
    assert not inner.passed
    assert verify.negative_control(inner).passed
    jump = verify.check_holder(verify.discontinuous_surrogate(coarse), verify.discontinuous_surrogate(fine),
                               CAUCHY, [0.25, 0.5])
    assert not jump.passed
    g = SpaceTimeGrid(8.0, 512, fine.grid.times, geometry="line")
    from levyheat.frozen import frozen_kernel
    leak = verify.check_mass(frozen_kernel(CAUCHY, symbol.constant(1.0), 0.0, g, check=False), 5e-3)
    assert not leak.passed
    # a control whose inner check passes is itself a failure
    assert not verify.negative_control(verify.check_mass(fine, 5e-3)).passed


def test_semigroup_properties():
    g = SpaceTimeGrid(32.0, 1024, np.geomspace(1e-3, 1.0, 9))
    op = verify.semigroup_operator(CAUCHY, symbol.constant(1.0), g)
    out = verify.check_semigroup(op, g, None, 5e-3, 1e-2, 1e-9)
    assert [c.name for c in out] == ["semigroup-constant", "semigroup-contraction", "semigroup-positivity",
                                     "semigroup-strong-continuity"]
    assert all(c.passed for c in out)


def test_randomized_checks_are_seeded():
    a = verify.check_three_g(CAUCHY, None, 11, 2000)
    b = verify.check_three_g(CAUCHY, None, 11, 2000)
    assert a.record() == b.record()


def test_lemma_constants_for_stable_and_log():
    for p in (CAUCHY, measure.log_profile(1.0)):
        assert verify.check_bound_function_mass(p).passed
        assert verify.check_time_convolution(p, draws=4).passed


def test_config_hash_is_order_free():
    assert verify.config_hash({"a": 1, "b": [2, 3]}) == verify.config_hash({"b": [2, 3], "a": 1})
