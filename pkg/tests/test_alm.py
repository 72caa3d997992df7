import numpy as np
import pytest

from lawopt import functionals as fn
from lawopt.alm import (AlmConfig, Problem, inner_loop, line_search, linearized_step, outer_loop)
from lawopt.lattice import Dynamics, Lattice, build_stencils
from lawopt.measure import dirac, moment
from lawopt.problems import make_problem

UNIT = Lattice.uniform(-5, 5, 1.0, 0.01, 0.02, -2, 2, 1.0)
UNIT_ST = build_stencils(UNIT, Dynamics.controlled_drift())
ZERO_COST = fn.MomentFunctional(phis=(lambda x: x,), psi=lambda z: 0 * z[..., 0:1],
                                dpsi=lambda z: np.array([[0.0]]), name="zero")
MEAN_MINUS = fn.MomentFunctional(phis=(lambda x: x,), psi=lambda z: z[..., 0:1] - 0.3,
                                 dpsi=lambda z: np.array([[1.0]]), name="mean-0.3")


@pytest.fixture(scope="module")
def tc1_small(small_lattice):
    return make_problem("variance_cap", 0.4, small_lattice)


@pytest.fixture(scope="module")
def tc2_small(small_lattice):
    return make_problem("expectation_floor", 0.6, small_lattice)


@pytest.fixture(scope="module")
def tc1_run(tc1_small):
    return outer_loop(tc1_small, AlmConfig(eta_star=1e-4, omega_star=1e-4))


@pytest.fixture(scope="module")
def tc2_run(tc2_small):
    return outer_loop(tc2_small, AlmConfig(eta_star=1e-4, omega_star=1e-4))


def test_config_validation():
    with pytest.raises(ValueError):
        AlmConfig(dtheta=0.3)
    with pytest.raises(ValueError):
        AlmConfig(eta_star=0.0)
    with pytest.raises(ValueError):
        AlmConfig(penalty_test="both")
    with pytest.raises(ValueError):
        AlmConfig(max_inner=0)


# line search ----------------------------------------------------------------

def test_line_search_constant_picks_zero():
    p = Problem(UNIT_ST, ZERO_COST, fn.zero_constraint(), dirac(UNIT, 0))
    m = dirac(UNIT, 0)
    assert line_search(m, dirac(UNIT, 2), [0.0], [0.0], [0.0], 10.0, p, 0.1) == 0.0


def test_line_search_decreasing_picks_one():
    p = Problem(UNIT_ST, fn.expectation(), fn.zero_constraint(), dirac(UNIT, 0))
    assert line_search(dirac(UNIT, 0), dirac(UNIT, -1), [0.0], [0.0], [0.0], 10.0, p, 1e-3) == 1.0


def test_line_search_quadratic():
    # L_A(theta) = c/2 (theta - 0.3)^2
    p = Problem(UNIT_ST, ZERO_COST, MEAN_MINUS, dirac(UNIT, 0))
    theta = line_search(dirac(UNIT, 0), dirac(UNIT, 1), [0.0], [0.0], [0.0], 10.0, p, 0.1)
    assert theta == pytest.approx(0.3, abs=1e-15)


# linearised step --------------------------------------------------------------

def test_linearized_step_constant_representative():
    p = Problem(UNIT_ST, ZERO_COST, fn.zero_constraint(), dirac(UNIT, 0))
    _, gap = linearized_step(dirac(UNIT, 1), [0.0], [0.0], 10.0, p)
    assert gap == 0.0


def test_linearized_step_fixed_point(small_lattice, small_stencils):
    p = Problem(small_stencils, fn.expectation(), fn.zero_constraint(), dirac(small_lattice, 0))
    sol, gap = linearized_step(p.m0, [0.0], [0.0], 10.0, p)
    assert gap < 0
    _, gap2 = linearized_step(sol.m_T, [0.0], [0.0], 10.0, p)
    assert abs(gap2) <= 1e-12


def test_linearized_step_tc2_first_gap(tc2_small):
    sol, gap = linearized_step(tc2_small.m0, [0.0], [0.0], 10.0, tc2_small)
    assert gap < 0
    rep = fn.aug_lagrangian_rep(tc2_small.F, tc2_small.G, tc2_small.m0, [0.0], [0.0], 10.0)
    assert gap == pytest.approx(sol.value - moment(tc2_small.m0, rep), abs=1e-15)


# inner loop -----------------------------------------------------------------

def test_inner_loop_returns_immediately_at_optimum(small_lattice, small_stencils):
    p = Problem(small_stencils, fn.expectation(), fn.zero_constraint(), dirac(small_lattice, 0))
    opt = p.solve(small_lattice.x).m_T
    res = inner_loop(opt, [0.0], [0.0], 10.0, 1e-10, p, AlmConfig())
    assert res.converged and res.inner_iterations == 0 and res.n_solves == 1


def test_inner_loop_linear_cost_is_frank_wolfe(small_lattice, small_stencils):
    p = Problem(small_stencils, fn.expectation(), fn.zero_constraint(), dirac(small_lattice, 0))
    res = inner_loop(p.m0, [0.0], [0.0], 10.0, 1e-10, p, AlmConfig())
    assert res.converged and res.inner_iterations <= 2


def test_inner_loop_rejects_negative_slack(tc1_small):
    with pytest.raises(ValueError):
        inner_loop(tc1_small.m0, [-1.0], [0.0], 10.0, 1e-3, tc1_small, AlmConfig())


def test_inner_loop_cap_is_reported(tc1_small):
    res = inner_loop(tc1_small.m0, [0.0], [0.0], 10.0, 1e-12, tc1_small, AlmConfig(max_inner=3))
    assert not res.converged and res.inner_iterations == 3 and res.n_solves == 4
    assert len(res.trace) == 3


def _all_inner(report):
    return [(res, rec.omega) for res, rec in zip(report.inner, report.outer)]


@pytest.mark.parametrize("run", ["tc1_run", "tc2_run"])
def test_descent_and_slack_feasibility(run, request):
    report = request.getfixturevalue(run)
    for res, omega in _all_inner(report):
        L = res.L_A_trace
        assert np.all(np.diff(L) <= 1e-12)
        for step, nxt in zip(res.trace, L[1:]):
            assert step.eps > omega
            assert nxt < step.L_A
            # the criterion is the max of two non-negative parts
            assert step.gap <= 1e-9 and step.slack_defect >= 0
            assert step.eps == max(-step.gap, step.slack_defect)
        assert np.all(res.s >= 0)


# outer loop -----------------------------------------------------------------

@pytest.mark.parametrize("run", ["tc1_run", "tc2_run"])
def test_outer_invariants(run, request):
    report = request.getfixturevalue(run)
    assert report.converged
    cs = [r.c for r in report.outer]
    assert all(a <= b for a, b in zip(cs, cs[1:]))
    lams = [np.zeros(1)] + [np.array(r.lam) for r in report.outer]
    for prev, rec, cur in zip(lams, report.outer, lams[1:]):
        if not rec.multiplier_updated:
            assert np.array_equal(prev, cur)
    last = report.outer[-1]
    assert np.all(report.lam >= -1e-4)
    assert last.residual_norm <= 1e-4 and last.eps <= 1e-4
    assert report.vi_residual <= 1e-4


def test_inactive_constraint_matches_unconstrained(small_lattice, small_stencils):
    p = make_problem("variance_cap", 1e6, small_lattice)
    report = outer_loop(p, AlmConfig(eta_star=1e-6, omega_star=1e-6))
    assert report.converged
    assert np.all(report.lam == 0.0)
    free = p.solve(small_lattice.x)
    assert np.array_equal(report.feedback.index, free.feedback.index)


def test_max_outer_reported(tc1_small):
    report = outer_loop(tc1_small, AlmConfig(eta_star=1e-12, omega_star=1e-12, max_outer=2))
    assert not report.converged
    assert report.status == "max_outer exceeded"
    assert len(report.outer) == 2


def test_iteration_counts_regression(tc1_run, tc2_run):
    # pinned to the first recorded values of this implementation
    assert (tc1_run.n_standard_solves, len(tc1_run.outer)) == (91, 36)
    assert (tc2_run.n_standard_solves, len(tc2_run.outer)) == (67, 35)
