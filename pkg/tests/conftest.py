import numpy as np
import pytest
from hypothesis import settings

from ronsnls.grid import PeriodicGrid

settings.register_profile("ronsnls", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("ronsnls")


@pytest.fixture(scope="session")
def dns_grid():
    """Default DNS grid: 256*pi box with 2**10 points."""
    return PeriodicGrid(256 * np.pi, 2**10)


@pytest.fixture(scope="session")
def rom_grid():
    """Fine quadrature grid for RONS and master-equation assembly."""
    return PeriodicGrid(256 * np.pi, 2**13)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_gaussian(rng, translating=False, full=False):
    """Random admissible Gaussian state in the sweep box used throughout the tests."""
    A = rng.uniform(0.02, 0.2)
    L = rng.uniform(5.0, 25.0)
    U = rng.uniform(-0.1, 0.1)
    phi = rng.uniform(-np.pi, np.pi)
    if full:
        return np.array([A, L, U, rng.uniform(-0.1, 0.1), phi, rng.uniform(-10, 10)])
    if translating:
        return np.array([A, L, U, phi, rng.uniform(-10, 10)])
    return np.array([A, L, U, phi])


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> str:
    """Print and remember one PASS/FAIL line for the acceptance summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
