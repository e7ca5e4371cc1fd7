import time

import numpy as np
import pytest

from levyheat import cli
from levyheat.config import admissibility, parse_config

MAIN_RUN = """\
[profile]
family = stable
alpha = 1.0

[coefficient]
name = tanh-ramp
amp = 0.25
level = 1.0
beta = 0.99

[grid]
L = 32
n = 2048
t_min = 0.0625
t_max = 1.0
t_count = 121

[case]
case = P3
targets = 0.0
"""

# verdict lines collected by the acceptance tests, printed at the end of the session
VERDICTS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical runs")


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance")
    for key in sorted(VERDICTS, key=str):
        terminalreporter.write_line(VERDICTS[key])


@pytest.fixture(scope="session")
def verdicts():
    return VERDICTS


@pytest.fixture(scope="session")
def main_run():
    """The variable-coefficient run: every main-suite check, keyed by name, plus wall time."""
    cfg = parse_config(MAIN_RUN)
    profile, coeff, cert = admissibility(cfg)
    t0 = time.perf_counter()
    checks, params = cli.main_suite(cfg, profile, coeff, cert, threads=1)
    return {c.name: c for c in checks}, params, time.perf_counter() - t0


@pytest.fixture
def rng():
    return np.random.default_rng(0x5EED)
