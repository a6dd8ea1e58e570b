import pytest

from qstockwell import stockwell as sw
from qstockwell.analytic import Gaussian
from qstockwell.grid import canonical_axis, lp_norm, sample_analytic

# (criterion number, title, passed, detail) appended by test_acceptance.py
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {title}: {detail}")


@pytest.fixture(scope="session")
def canonical_axes():
    ax = canonical_axis()
    return (ax, ax)


@pytest.fixture(scope="session")
def gaussian_signal(canonical_axes):
    return sample_analytic(Gaussian(1.0, 1.0), canonical_axes)


@pytest.fixture(scope="session")
def dog_window(canonical_axes):
    return sw.make_window("admissible_dog", axes=canonical_axes, alpha=0.5, beta=2.0)


@pytest.fixture(scope="session")
def dog_admissibility(dog_window):
    return sw.admissibility_constant(dog_window)


@pytest.fixture(scope="session")
def canonical_volume(gaussian_signal, dog_window, canonical_axes):
    """Coefficients of the unit Gaussian with admissible_dog(0.5, 2) on the canonical grids."""
    return sw.forward_fast(gaussian_signal, dog_window, sw.canonical_xi_axes(), canonical_axes)


@pytest.fixture(scope="session")
def canonical_norms(gaussian_signal, dog_window):
    return lp_norm(gaussian_signal, 2), dog_window.norm
