"""Shared, session-cached zero sets (the expensive part of the suite)."""

import time

import pytest

from kummerzero import classify, find_zeros

ALPHAS = (0.5, 1 + 0.3j, 2.5)
GAMMAS = (1.5, 2 + 0.2j, 4)
GRID = tuple((a, g) for a in ALPHAS for g in GAMMAS)
GRID_RMAX = 100.0

# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE_LINES: dict[int, str] = {}
TIMINGS: dict[str, float] = {}


@pytest.fixture(scope="session")
def closed_form_zeros():
    """(alpha, gamma) = (1, 2): zeros 2 pi i k, k != 0, up to |z| <= 150."""
    start = time.perf_counter()
    zeros = find_zeros(classify(1, 2), 150.0)
    TIMINGS["closed_form"] = time.perf_counter() - start
    return zeros


@pytest.fixture(scope="session")
def grid_zero_sets():
    """Zeros to r_max = 100 for every Generic point of the 3x3 grid."""
    out = {}
    for alpha, gamma in GRID:
        params = classify(alpha, gamma)
        if params.is_generic:
            out[(alpha, gamma)] = find_zeros(params, GRID_RMAX)
    return out


@pytest.fixture(scope="session")
def half_zeros(grid_zero_sets):
    """(alpha, gamma) = (0.5, 1.5) to r_max = 100."""
    return grid_zero_sets[(0.5, 1.5)]


@pytest.fixture(scope="session")
def half_zeros_long():
    """(0.5, 1.5) far enough out to hold the 40th zero pair."""
    return find_zeros(classify(0.5, 1.5), 262.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
