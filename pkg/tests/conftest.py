from pathlib import Path

import pytest

from jumpback import FockVector, Subspace

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

_ACCEPTANCE = []


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def h1():
    """span{|1>, (|0>+|2>)/sqrt(2)} on n_max = 6."""
    return Subspace((FockVector.number_state(1, 6),
                     FockVector.superposition({0: 1, 2: 1}, 6)))


@pytest.fixture
def acceptance_log():
    def log(label, ok, detail=""):
        _ACCEPTANCE.append(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
        return ok
    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)

