import numpy as np
import pytest

from liecurv import catalog
from liecurv.curvature import CurvatureContext

# lines appended by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def ctx_for(ident, metric="default"):
    return CurvatureContext(catalog.metric_algebra(ident, metric))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
