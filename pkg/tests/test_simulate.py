import math

import numpy as np
import pytest

from lawopt.alm import AlmConfig, outer_loop
from lawopt.dp import ControlField
from lawopt.lattice import Dynamics, Lattice
from lawopt.measure import empirical_wasserstein1
from lawopt.problems import make_problem
from lawopt.simulate import (branch_thresholds, branching_demo, fit_loglog_slope, sample_measure,
                             simulate_feedback)

LAT = Lattice.uniform(-5, 5, 0.01, 0.01, 1.0, -2, 2, 1.0)
DYN = Dynamics.controlled_drift()
DOWN, UP = ControlField.constant(LAT, -2.0), ControlField.constant(LAT, 2.0)


def test_deterministic_ode():
    still = Dynamics(drift=lambda x, u: u + 0 * x, volatility=lambda x, u: 0 * x)
    ens = simulate_feedback(still, DOWN, 0.0, 1000, seed=0)
    assert ens.terminal_samples.shape == (1000,)
    np.testing.assert_allclose(ens.terminal_samples, -2.0, atol=1e-12, rtol=0)


def test_brownian_statistics():
    n = 100_000
    ens = simulate_feedback(DYN, ControlField.constant(LAT, 0.0), 0.0, n, seed=1)
    x = ens.terminal_samples
    assert abs(x.mean()) <= 3 * math.sqrt(1.0 / n)
    assert abs(x.var() - 1.0) <= 3 * math.sqrt(2.0 / n)


def test_simulation_matches_chain(small_lattice):
    report = outer_loop(make_problem("variance_cap", 0.4, small_lattice), AlmConfig(eta_star=1e-4, omega_star=1e-4))
    n = 100_000
    ens = simulate_feedback(DYN, report.feedback, 0.0, n, seed=2)
    d = empirical_wasserstein1(ens.terminal_samples, sample_measure(report.m_final, n))
    assert d <= 3 * max(small_lattice.dx, math.sqrt(small_lattice.dt))


def test_simulation_is_deterministic():
    a = simulate_feedback(DYN, UP, 0.3, 500, seed=9)
    b = simulate_feedback(DYN, UP, 0.3, 500, seed=9)
    assert np.array_equal(a.terminal_samples, b.terminal_samples)
    c = simulate_feedback(DYN, UP, 0.3, 500, seed=10)
    assert not np.array_equal(a.terminal_samples, c.terminal_samples)


def test_sup_moment_stable_under_doubling():
    m1 = simulate_feedback(DYN, DOWN, 0.0, 20_000, seed=3).sup_moment(2)
    m2 = simulate_feedback(DYN, DOWN, 0.0, 40_000, seed=4).sup_moment(2)
    assert np.isfinite(m1) and abs(m2 / m1 - 1) < 0.05


def test_zero_paths_rejected():
    with pytest.raises(ValueError):
        simulate_feedback(DYN, DOWN, 0.0, 0, seed=0)


def test_sample_csv(tmp_path):
    ens = simulate_feedback(DYN, DOWN, 0.0, 10, seed=0)
    ens.to_csv(tmp_path / "s.csv")
    back = np.loadtxt(tmp_path / "s.csv", skiprows=1)
    assert np.array_equal(back, ens.terminal_samples)


@pytest.mark.parametrize("theta, expected", [((0.5, 0.5), [0.0]),
                                             ((0.25, 0.5, 0.25), [-0.6744897501960817, 0.6744897501960817]),
                                             ((1.0,), [])])
def test_branch_thresholds(theta, expected):
    np.testing.assert_allclose(branch_thresholds(theta), expected, atol=1e-12)


@pytest.mark.parametrize("theta", [(0.3, 0.3), (1.2, -0.2), ()])
def test_bad_weights_rejected(theta):
    controls = [DOWN, UP][:len(theta)]
    with pytest.raises(ValueError):
        branching_demo(DYN, controls, theta, 0.01, 100, seed=0)


@pytest.mark.parametrize("eps", [0.0, 1.0, 2.0])
def test_bad_delay_rejected(eps):
    with pytest.raises(ValueError):
        branching_demo(DYN, [DOWN], [1.0], eps, 100, seed=0)


def test_branch_fractions_match_weights():
    n = 50_000
    theta = np.array([0.2, 0.5, 0.3])
    res = branching_demo(DYN, [DOWN, ControlField.constant(LAT, 0.0), UP], theta, 0.01, n, seed=5)
    se = np.sqrt(theta * (1 - theta) / n)
    assert np.all(np.abs(res.branch_fractions - theta) <= 3 * se)


def test_single_branch_shift_vanishes():
    d = [branching_demo(DYN, [DOWN], [1.0], eps, 50_000, seed=6).distance for eps in (0.04, 0.01, 0.0025)]
    assert d[0] > d[1] > d[2]
    assert d[2] < 0.02


def test_branching_is_deterministic():
    a = branching_demo(DYN, [DOWN, UP], [0.5, 0.5], 0.01, 2000, seed=11)
    b = branching_demo(DYN, [DOWN, UP], [0.5, 0.5], 0.01, 2000, seed=11)
    assert a.distance == b.distance


def test_loglog_slope():
    eps = np.array([0.04, 0.01, 0.0025])
    assert fit_loglog_slope(eps, 3 * np.sqrt(eps)) == pytest.approx(0.5)
