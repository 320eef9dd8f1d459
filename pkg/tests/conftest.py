import numpy as np
import pytest

from errts.estimation import ArModel
from errts.montecarlo import simulate_paths

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def ar1():
    return ArModel(phi0=1.0, phi=(0.5,), sigma_eps2=1.0)


@pytest.fixture
def ar1_zero_mean():
    return ArModel(phi0=0.0, phi=(0.5,), sigma_eps2=1.0)


@pytest.fixture
def ar2():
    return ArModel(phi0=0.0, phi=(0.5, -0.3), sigma_eps2=1.0)


def simulate(model, T, seed):
    """One stationary path as a plain array."""
    return simulate_paths(model, T, np.random.default_rng(seed))[0]


@pytest.fixture
def record():
    def _record(name, passed, detail):
        ACCEPTANCE_RESULTS.append((name, bool(passed), detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
