"""Shared test plumbing.

The acceptance tests register one verdict line per criterion here; the
lines are echoed in the terminal summary of every run so the acceptance
status is visible even when print capture is on.
"""

import pytest

_verdicts = []


class AcceptanceLog:
    def verdict(self, number, name, failures, extra=""):
        status = "PASS" if not failures else "FAIL"
        line = f"ACCEPTANCE {number} ({name}): {status}"
        if extra:
            line += f" [{extra}]"
        _verdicts.append((number, line))
        print(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_verdicts):
            terminalreporter.write_line(line)
