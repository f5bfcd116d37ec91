"""Shared fixtures and the acceptance-summary terminal hook."""

from __future__ import annotations

import pytest

from latflip import EdgePoset, make_boundary_condition, rectangle

# One line per acceptance criterion, printed in the terminal summary so the
# verdicts survive pytest's output capture.  test_acceptance.py appends here.
ACCEPTANCE_LINES: list[tuple[int, str]] = []


def record_acceptance(number: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE_LINES.append(
        (number, "criterion %2d %s  %s" % (number, "PASS" if ok else "FAIL", detail))
    )
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def strip21():
    region = rectangle(2, 1)
    bc = make_boundary_condition(region)
    return region, bc, EdgePoset.of(region, bc)


@pytest.fixture(scope="session")
def square22():
    region = rectangle(2, 2)
    bc = make_boundary_condition(region)
    return region, bc, EdgePoset.of(region, bc)


@pytest.fixture(scope="session")
def square33():
    region = rectangle(3, 3)
    bc = make_boundary_condition(region)
    return region, bc, EdgePoset.of(region, bc)
