import functools

import pytest

from incidence_braid.families import FamilyParams, lambda_build, shift_spec
from incidence_braid.scalar import GF, QQ

# One concrete instance per classification row: (field, ε, α, β_a, β_b, Γ).
ROW_PARAMS = {
    1: (QQ, 1, 1, 2, 2, 3),
    2: (QQ, 1, 1, 1, 2, -2),
    3: (GF(2), 1, 1, 0, 1, 1),
    4: (QQ, 1, -1, 1, 1, 5),
    5: (QQ, 1, 2, 1, 1, "-1/2"),
    6: (QQ, -1, 1, 0, 3, 7),
    7: (QQ, -1, -1, 2, 0, 0),
    8: (QQ, -1, 3, 1, -2, "-5/6"),
}
SPECS = [(1, 1), (2, 1), (4, 1), (3, 2)]


def row_params(row):
    return FamilyParams.make(*ROW_PARAMS[row])


@functools.lru_cache(maxsize=None)
def row_table(row, u, v):
    return lambda_build(shift_spec(u, v), row_params(row))


@pytest.fixture
def table_row8():
    return row_table(8, 1, 1)


@pytest.fixture
def table_row1():
    return row_table(1, 1, 1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
