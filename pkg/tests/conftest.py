import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rbrcd.graph import from_edges  # noqa: E402


@pytest.fixture
def triangle():
    return from_edges(3, [0, 1, 2], [1, 2, 0])


@pytest.fixture
def two_triangles():
    return from_edges(6, [0, 1, 2, 3, 4, 5], [1, 2, 0, 4, 5, 3])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


@pytest.fixture
def accept():
    """Record one acceptance line; the line is printed even if the test fails."""

    def record(num, ok, detail):
        line = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
