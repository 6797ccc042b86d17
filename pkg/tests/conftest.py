import pytest

import countreg

import _acceptance_report


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compilation must not bleed into timed assertions
    countreg.warm_up()


def pytest_terminal_summary(terminalreporter):
    if _acceptance_report.LINES:
        terminalreporter.section("acceptance checks")
        for line in _acceptance_report.LINES:
            terminalreporter.write_line(line)
