import pytest

from hilfer_diffusion import HarmonicModel, TwoTermModel

#: Lines reported by the acceptance tests, echoed in the terminal summary.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def fig1():
    return TwoTermModel.figure1(0)


@pytest.fixture
def caputo():
    return TwoTermModel(a=0.5, b=0.5, mu1=0.75, mu2=0.625, nu1=1.0, nu2=1.0, D=1.0)


@pytest.fixture
def heat():
    return TwoTermModel(a=1.0, b=0.0, mu1=1.0, mu2=0.5, nu1=1.0, nu2=1.0, D=1.0)


@pytest.fixture
def caputo_trap(caputo):
    return HarmonicModel(caputo, mass=1.0, omega=1.0, eta=1.0, kBT=1.0, x0=1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
