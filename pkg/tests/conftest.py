import math

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

GOLDEN = (math.sqrt(5) - 1) / 2


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(REPORT):
        terminalreporter.write_line(REPORT[key])


@pytest.fixture
def golden():
    return GOLDEN
