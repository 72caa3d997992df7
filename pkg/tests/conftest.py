import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lawopt.lattice import Dynamics, Lattice, build_stencils

settings.register_profile("default", max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def unit_lattice():
    """Nodes -5..5 with spacing 1; handy for hand-computed measures."""
    return Lattice.uniform(x_min=-5, x_max=5, dx=1.0, dt=0.01, T=0.02, u_min=-2, u_max=2, du=1.0)


@pytest.fixture(scope="session")
def small_lattice():
    return Lattice.uniform(x_min=-5, x_max=5, dx=0.05, dt=0.01, T=0.5, u_min=-2, u_max=2, du=0.5)


@pytest.fixture(scope="session")
def small_stencils(small_lattice):
    return build_stencils(small_lattice, Dynamics.controlled_drift())


def random_weights(rng, n, support=None):
    w = np.zeros(n)
    idx = np.arange(n) if support is None else np.asarray(support)
    w[idx] = rng.random(len(idx))
    return w / w.sum()


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def check(label: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
        assert passed, f"{label}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
