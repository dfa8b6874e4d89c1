import numpy as np
import pytest

from anisojump.kernel import Sinusoidal, cone_kernel, isotropic_kernel

ACCEPTANCE = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def iso2():
    return isotropic_kernel(2, 1.0)


@pytest.fixture(scope="session")
def narrow_cone():
    """Caps around +-e1 with cos(theta) = 0.99."""
    return cone_kernel([(1.0, 0.0)], 0.99, dim=2, alpha=1.0)


@pytest.fixture(scope="session")
def two_cap():
    return cone_kernel([(1.0, 0.0), (0.0, 1.0)], 0.9, dim=2, alpha=1.0, upper=(2.0, 1.5))


@pytest.fixture(scope="session")
def modulated():
    return cone_kernel([(1.0, 0.0), (1.0, 1.0)], 0.8, dim=2, alpha=1.2, upper=(2.0, 3.0),
                       modulator=Sinusoidal((3.0, -1.0), 0.3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
