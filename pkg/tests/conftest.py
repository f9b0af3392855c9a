import logging

import pytest

from hindex_bayes.data import Dataset, JournalRecord


@pytest.fixture(autouse=True)
def _quiet_synthetic_warnings(caplog):
    caplog.set_level(logging.ERROR, logger="hindex_bayes.data")


@pytest.fixture
def small_dataset():
    records = [
        JournalRecord("J1", 10, 100, 400),
        JournalRecord("J2", 25, 900, 12000),
        JournalRecord("J3", 40, 2500, 40000),
        JournalRecord("J4", 6, 60, 150),
        JournalRecord("J5", 18, 400, 3500),
    ]
    return Dataset("small", records)


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one verdict line per acceptance criterion for the summary."""
    lines = getattr(request.config, "_acceptance_lines", None)
    if lines is None:
        lines = request.config._acceptance_lines = []
    return lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
