import random

import pytest

from tablesynth.model import GridCell, TableGrid

# populated by tests/test_acceptance.py; printed after capture ends
acceptance_verdicts = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_verdicts:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_verdicts:
            terminalreporter.write_line(line)


def grid_shape(grid: TableGrid):
    """Structure signature ignoring header flags."""
    return (grid.n_rows, grid.n_cols,
            tuple((c.row, c.col, c.row_span, c.col_span) for c in grid.cells))


def make_grid(n_rows, n_cols, spec):
    """spec: list of (row, col, row_span, col_span[, is_header])."""
    cells = tuple(GridCell(*s) for s in spec)
    return TableGrid(n_rows, n_cols, cells)


@pytest.fixture
def rng():
    return random.Random(1234)
