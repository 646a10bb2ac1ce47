import pytest

from sbdimer.model import SET_A, SET_B, BasisSpec
from sbdimer.spectrum import solve

# (criterion, passed, detail) rows reported by test_acceptance.py
ACCEPTANCE = []


@pytest.fixture(scope="session")
def full_basis():
    return BasisSpec(n_osc=2000, keep=1100)


@pytest.fixture(scope="session")
def es_a(full_basis):
    return solve(SET_A, full_basis)


@pytest.fixture(scope="session")
def es_b(full_basis):
    return solve(SET_B, full_basis)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        tr.write_line(f"criterion {crit:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
