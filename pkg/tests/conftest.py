import pytest
from hypothesis import settings

from lfpso.core import Arena, SimParams

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def params():
    return SimParams()


@pytest.fixture
def empty_arena(params):
    return Arena.build(params)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
