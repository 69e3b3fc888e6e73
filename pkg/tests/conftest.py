from fractions import Fraction as F

import pytest

from augtree import fixtures
from augtree.classification import classify
from augtree.quotient import build_quotient
from augtree.tree import build_snapshot

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def quarter():
    return fixtures.overlapping_quarter()


@pytest.fixture(scope="session")
def touching():
    return fixtures.touching_triple(F(1, 3))


@pytest.fixture(scope="session")
def cantor():
    return fixtures.cantor()


@pytest.fixture(scope="session")
def quarter_raw6(quarter):
    return build_snapshot(quarter, 6)


@pytest.fixture(scope="session")
def quarter_q6(quarter_raw6):
    return build_quotient(quarter_raw6)


@pytest.fixture(scope="session")
def touching6(touching):
    return build_snapshot(touching, 6)


@pytest.fixture(scope="session")
def quarter_table(quarter_q6):
    return classify(quarter_q6)


@pytest.fixture(scope="session")
def touching_table(touching6):
    return classify(touching6)


@pytest.fixture(scope="session")
def k2_q6():
    return build_quotient(build_snapshot(fixtures.k_lambda(2), 6))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
