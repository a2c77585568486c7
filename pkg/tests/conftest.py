import numpy as np
import pytest
from hypothesis import settings

from adcrates.cir import CirParams
from adcrates.mc import Model1

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# PASS/FAIL lines from the acceptance tests, echoed after the run
ACCEPTANCE_LINES: list[str] = []

RISK_FREE = CirParams(0.0398, 0.0544, 0.0455, 0.0346)
SPREAD = CirParams(4.0049, 0.0029, 0.0258, 0.0004)
TENORS = np.arange(1.0, 31.0)


@pytest.fixture
def model1():
    return Model1(RISK_FREE, SPREAD)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
