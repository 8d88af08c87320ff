import math

import pytest

from sphereig.cap_spectrum import CapProblem, extend_profile, solve_mode

# one line per acceptance criterion, echoed after the run (capture-proof)
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def tilt_pair_pi3():
    """(l=1, k=1) eigenpair of the N=2 cap of radius pi/3."""
    return solve_mode(CapProblem(dim=2, gamma=math.pi / 3, mode_l=1), 1)[0]


@pytest.fixture(scope="session")
def hemisphere_pair():
    """(l=1, k=1) eigenpair of the N=2 hemisphere (g = sin theta, mu = 2)."""
    return solve_mode(CapProblem(dim=2, gamma=math.pi / 2, mode_l=1), 1)[0]


@pytest.fixture(scope="session")
def extended_pi3(tilt_pair_pi3):
    return extend_profile(tilt_pair_pi3, math.pi / 3)


@pytest.fixture(scope="session")
def extended_hemisphere(hemisphere_pair):
    return extend_profile(hemisphere_pair, math.pi / 2)
