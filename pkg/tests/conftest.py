import math
from pathlib import Path

import numpy as np
import pytest

from qats.model import GaussianEmission, build_model

DATA = Path(__file__).resolve().parents[1] / "data" / "golden_example"

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def golden_model():
    return build_model([0.5, 0.5], [[2 / 3, 1 / 3], [1 / 3, 2 / 3]],
                       GaussianEmission(means=(1.0, 2.0), sigma=2.0))


@pytest.fixture
def golden_y():
    return np.array([1.0, 4.0, -1.0, 1.0])


@pytest.fixture
def golden_theta():
    # log pi + 3 log q_off + 4 log(normalising constant of N(., 4))
    return -math.log(2) + 3 * -math.log(3) + 4 * -0.5 * math.log(8 * math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
