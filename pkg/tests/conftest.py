import mpmath
import pytest

mpmath.mp.dps = 40


@pytest.fixture(scope="session")
def mp():
    return mpmath


def pytest_configure(config):
    config.acceptance_lines = {}


def pytest_terminal_summary(terminalreporter, config):
    lines = config.acceptance_lines
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
