import json
import math

import numpy as np
import pytest

from levyheat import cli
from levyheat import io as lio
from levyheat.config import TOLERANCES, ConfigError, admissibility, parse_config

SMALL_FROZEN = """\
[profile]
family = stable
alpha = 1.0

[coefficient]
name = constant
c0 = 1.0

[grid]
L = 16
n = 512
t_min = 0.25
t_max = 1.0
t_count = 4
"""

BAD_BETA = """\
[profile]
family = stable
alpha = 1.0

[coefficient]
name = tanh-ramp
amp = 0.25
beta = 1.0
"""


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_documented_default_tolerances():
    cfg = parse_config("")
    assert cfg.tolerances == {"mass_tol": 5e-3, "chk_tol": 1e-3, "series_tol": 1e-6, "quad_tol": 1e-6,
                              "tol_fft": 1e-8, "tol_inv": 1e-10, "neg_tol": 1e-9, "mol_tol": 2e-2,
                              "approach_tol": 1e-2}
    assert cfg.tolerances == TOLERANCES
    assert cfg.seed == 0x5EED


def test_beta_at_one_is_rejected_with_line():
    with pytest.raises(ConfigError) as exc:
        parse_config(BAD_BETA)
    assert exc.value.line == 8 and "beta" in str(exc.value)


def test_unknown_key_and_section():
    with pytest.raises(ConfigError) as exc:
        parse_config("[grid]\nL = 8\nwidth = 3\n")
    assert exc.value.line == 3
    with pytest.raises(ConfigError):
        parse_config("[mesh]\nn = 8\n")
    with pytest.raises(ConfigError):
        parse_config("[grid]\nn = 100\n")


def test_overrides_and_seed():
    cfg = parse_config(SMALL_FROZEN, overrides=["mass_tol=1e-4"], seed=3)
    assert cfg.tolerances["mass_tol"] == 1e-4 and cfg.seed == 3
    assert cfg.hash() != parse_config(SMALL_FROZEN).hash()
    with pytest.raises(ConfigError):
        parse_config(SMALL_FROZEN, overrides=["nope=1"])
    with pytest.raises(ConfigError):
        parse_config(SMALL_FROZEN, overrides=["mass_tol"])


def test_admissibility_rejects_p1_for_cauchy():
    cfg = parse_config(SMALL_FROZEN + "\n[case]\ncase = P1\n")
    with pytest.raises(Exception):
        admissibility(cfg)


def test_bad_config_exits_two_without_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["frozen", str(_write(tmp_path, BAD_BETA)), "--out", str(out), "-q"])
    assert code == 2
    assert not out.exists()
    assert "line 8" in capsys.readouterr().err


def test_inadmissible_case_exits_two(tmp_path):
    out = tmp_path / "out"
    path = _write(tmp_path, SMALL_FROZEN + "\n[case]\ncase = P1\n")
    assert cli.main(["frozen", str(path), "--out", str(out), "-q"]) == 2
    assert not out.exists()


def test_profile_subcommand(tmp_path):
    out = tmp_path / "out"
    path = _write(tmp_path, SMALL_FROZEN.replace("alpha = 1.0", "alpha = 1.5"))
    assert cli.main(["profile", str(path), "--out", str(out), "-q"]) == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["alpha_h"] == pytest.approx(1.5, abs=0.011)
    header, table = lio.read_csv(out / "profile_table.csv")
    assert header == ["r", "h", "K", "h_inv_of_1_over_h"]
    r, h, K = table[:, 0], table[:, 1], table[:, 2]
    np.testing.assert_allclose(h, 2 * r ** -1.5 * (1 / 0.5 + 1 / 1.5), rtol=1e-8)
    np.testing.assert_allclose(K, 4 * r ** -1.5, rtol=1e-8)
    header, rho = lio.read_csv(out / "rho.csv")
    assert header == ["t", "x", "rho"] and np.all(rho[:, 2] > 0)


def test_frozen_outputs_are_byte_identical(tmp_path):
    path = _write(tmp_path, SMALL_FROZEN)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["frozen", str(path), "--out", str(a), "-q"]) == 0
    assert cli.main(["frozen", str(path), "--out", str(b), "-q", "--threads", "2"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["exponent.csv", "frozen.bin", "frozen.csv", "report.json"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    d, n, L, times, values = lio.read_snapshot(a / "frozen.bin")
    assert (d, n, L) == (1, 512, 16.0)
    np.testing.assert_allclose(times, [0.25, 0.5, 0.75, 1.0])
    header, psi = lio.read_csv(a / "exponent.csv")
    np.testing.assert_allclose(psi[:, 1], math.pi * psi[:, 0], rtol=1e-6)


def test_failed_check_exits_one(tmp_path):
    path = _write(tmp_path, SMALL_FROZEN)
    out = tmp_path / "out"
    # the torus mass error sits at round-off level, far above this tolerance
    assert cli.main(["frozen", str(path), "--out", str(out), "-q", "--tol-override", "mass_tol=1e-300"]) == 1
    rep = json.loads((out / "report.json").read_text())
    mass = next(c for c in rep["checks"] if c["check"] == "mass")
    assert mass["tol"] == 1e-300 and not mass["pass"]
    assert rep["summary"]["fail"] == 1


def test_thread_count_validated(tmp_path):
    assert cli.main(["frozen", str(_write(tmp_path, SMALL_FROZEN)), "--out", str(tmp_path / "o"),
                     "--threads", "0", "-q"]) == 2


@pytest.fixture(scope="module")
def appendix_run(tmp_path_factory):
    from pathlib import Path
    here = Path(__file__).parent / "data"
    out = tmp_path_factory.mktemp("appendix")
    code = cli.main(["verify", str(here / "appendix.ini"), "--suite", "appendix", "--out", str(out), "-q"])
    return code, json.loads((out / "report.json").read_text()), json.loads(
        (here / "appendix_report.json").read_text())


@pytest.mark.slow
def test_appendix_suite_passes(appendix_run):
    code, rep, _ = appendix_run
    assert code == 0
    mass = rep["checks"][0]
    assert mass["check"] == "bound-function-mass[stable,d=1]" and mass["pass"]


@pytest.mark.slow
def test_appendix_report_matches_golden(appendix_run):
    _, rep, gold = appendix_run
    assert rep["environment"] == gold["environment"]
    assert [c["check"] for c in rep["checks"]] == [c["check"] for c in gold["checks"]]
    for got, want in zip(rep["checks"], gold["checks"]):
        assert got["pass"] == want["pass"] and got["tol"] == want["tol"]
        for key in ("constant", "residual"):
            if want[key] is None:
                assert got[key] is None
            else:
                assert got[key] == pytest.approx(want[key], rel=1e-9, abs=1e-15)
