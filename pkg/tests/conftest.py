import hypothesis
import numpy as np
import pytest

from qthermo.model import SourcePair

np.seterr(over="warn", invalid="warn", divide="warn", under="ignore")

hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def generic_pair():
    return SourcePair(t1=0.8, t2=1.2, omega=1.0, eta=0.5)


@pytest.fixture(scope="session")
def fig5_pair():
    return SourcePair(t1=8.0, t2=10.0, omega=10.0, eta=0.5)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
