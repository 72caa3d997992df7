"""Augmented Lagrangian method over the reachable set of terminal laws.

The outer loop updates the multiplier and the penalty; the inner loop minimises
the augmented Lagrangian in ``(m, s)`` with conditional-gradient steps: each
step solves one standard problem whose terminal cost is the derivative
representative of ``L_A``, then moves along the segment towards its terminal
law with a grid line search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import functionals as fn
from .diagnostics import CertificateRefused, OptimalityCertificate, certify, gap_bound
from .dp import ControlField, StandardSolution, ValueField, solve_standard
from .lattice import ControlStencil
from .measure import DiscreteMeasure, mixture, moment

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Problem:
    """Cost ``F``, constraints ``G <= 0``, the chain and the initial law."""

    stencils: ControlStencil
    F: fn.MomentFunctional
    G: fn.MomentFunctional
    m0: DiscreteMeasure

    @property
    def lattice(self):
        return self.stencils.lattice

    @property
    def n_constraints(self) -> int:
        return int(np.atleast_1d(self.G(self.m0)).shape[0])

    def solve(self, phi: np.ndarray) -> StandardSolution:
        return solve_standard(self.stencils, phi, self.m0)


@dataclass(frozen=True)
class AlmConfig:
    eta_star: float = 1e-5
    omega_star: float = 1e-5
    c0: float = 10.0
    penalty_growth: float = 10.0
    eta_exponent: float = 0.1  # eta reset to 1 / c**eta_exponent
    eta_shrink: float = 10.0 ** 0.1
    omega_shrink: float = 10.0
    max_outer: int = 100
    max_inner: int = 5000
    dtheta: float = 1e-6
    # tolerance the residual |G+s| is compared with to decide between a multiplier
    # update and a penalty increase: "eta" (eta_k) or "omega" (omega_k)
    penalty_test: str = "eta"
    # keep omega_k >= omega_star; below it the inner criterion is stricter than
    # termination needs and soon below the rounding level of the gap
    omega_floor: bool = True

    def __post_init__(self):
        if self.penalty_test not in ("omega", "eta"):
            raise ValueError("penalty_test must be 'omega' or 'eta'")
        for name in ("eta_star", "omega_star", "c0", "penalty_growth", "eta_exponent",
                     "eta_shrink", "omega_shrink", "dtheta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        n = 1.0 / self.dtheta
        if abs(n - round(n)) > 1e-9 * n:
            raise ValueError("dtheta must divide 1")


@dataclass
class AlmState:
    m: DiscreteMeasure
    s: np.ndarray
    lam: np.ndarray
    c: float
    eta: float
    omega: float
    k: int = 0


@dataclass(frozen=True)
class InnerStep:
    L_A: float
    eps: float
    theta: float
    gap: float
    slack_defect: float


@dataclass
class InnerResult:
    m: DiscreteMeasure
    s: np.ndarray
    eps: float
    inner_iterations: int
    converged: bool
    n_solves: int
    trace: list[InnerStep] = field(default_factory=list)
    final_L_A: float = float("nan")
    # theta = 0 with an unchanged slack: every further iteration repeats this one
    stalled: bool = False

    @property
    def L_A_trace(self) -> np.ndarray:
        return np.array([st.L_A for st in self.trace] + [self.final_L_A])


@dataclass(frozen=True)
class OuterRecord:
    k: int
    residual_norm: float
    eps: float
    c: float
    eta: float
    omega: float
    lam: tuple[float, ...]
    multiplier_updated: bool
    inner_iterations: int
    inner_converged: bool
    inner_stalled: bool = False


@dataclass
class AlmReport:
    converged: bool
    lam: np.ndarray
    feedback: ControlField
    value_field: ValueField
    m_final: DiscreteMeasure  # law reached by the final feedback
    m_last: DiscreteMeasure  # last (possibly mixed) inner iterate
    s_last: np.ndarray
    c: float
    n_standard_solves: int
    outer: list[OuterRecord] = field(default_factory=list)
    inner: list[InnerResult] = field(default_factory=list)
    constraint_final: np.ndarray | None = None
    cost_final: float = float("nan")
    vi_residual: float = float("nan")
    certificate: OptimalityCertificate | None = None
    # gap bound at the last inner iterate (feasible up to eta_star, unlike the bang-bang law)
    gap_bound_iterate: float | None = None
    gap_bound_iterate_refusal: str | None = None
    status: str = ""


def linearized_step(m: DiscreteMeasure, s, lam, c, problem: Problem):
    """Minimise the linearised augmented Lagrangian over reachable laws.

    Returns the standard-problem solution (its terminal law is the target of the
    step) and the gap ``inf_m DL_A(m_l)(m - m_l)``, which is non-positive.
    """
    rep = fn.aug_lagrangian_rep(problem.F, problem.G, m, s, lam, c)
    sol = problem.solve(rep)
    gap = sol.value - moment(m, rep)
    return sol, gap


def _theta_grid(dtheta: float) -> np.ndarray:
    n = int(round(1.0 / dtheta))
    return np.arange(n + 1) / n


def line_search_values(zF0, dzF, zG0, dzG, s, ds, lam, c, F, G, thetas) -> np.ndarray:
    """``L_A`` along the segment, from moment vectors that are affine in theta."""
    th = thetas[:, None]
    f = F.from_moments(zF0 + th * dzF)[:, 0]
    g = G.from_moments(zG0 + th * dzG)
    sl = np.maximum(s + th * ds, 0.0)
    r = g + sl
    return f + r @ lam + 0.5 * c * np.einsum("ij,ij->i", r, r)


def line_search(m, m_tilde, s, ds, lam, c, problem: Problem, dtheta: float) -> float:
    """Grid minimiser of ``L_A`` over theta in ``{0, dtheta, ..., 1}``; ties go to the smaller theta."""
    F, G = problem.F, problem.G
    zF0 = F.moment_vector(m)
    zG0 = G.moment_vector(m)
    dzF = F.moment_vector(m_tilde) - zF0
    dzG = G.moment_vector(m_tilde) - zG0
    thetas = _theta_grid(dtheta)
    vals = line_search_values(zF0, dzF, zG0, dzG, np.asarray(s, float), np.asarray(ds, float),
                              np.atleast_1d(np.asarray(lam, float)), c, F, G, thetas)
    return float(thetas[int(np.argmin(vals))])


def inner_loop(m0: DiscreteMeasure, s0, lam, c: float, omega: float,
               problem: Problem, config: AlmConfig) -> InnerResult:
    F, G = problem.F, problem.G
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    m = m0
    s = np.array(s0, dtype=float)
    if np.any(s < 0):
        raise ValueError("slack must be non-negative")
    trace: list[InnerStep] = []
    n_solves = 0
    for ell in range(config.max_inner + 1):
        sol, gap = linearized_step(m, s, lam, c, problem)
        n_solves += 1
        ds = -fn.slack_gradient(G, m, s, lam, c)
        slack_defect = float(np.max(np.abs(s - np.maximum(s + ds, 0.0))))
        eps = max(-gap, slack_defect)
        L = fn.aug_lagrangian(F, G, m, s, lam, c)
        if eps <= omega or ell == config.max_inner:
            return InnerResult(m=m, s=s, eps=eps, inner_iterations=ell, converged=eps <= omega,
                               n_solves=n_solves, trace=trace, final_L_A=L)
        theta = line_search(m, sol.m_T, s, ds, lam, c, problem, config.dtheta)
        s_next = np.maximum(s + theta * ds, 0.0)
        if theta == 0.0 and np.array_equal(s_next, s):
            return InnerResult(m=m, s=s, eps=eps, inner_iterations=ell, converged=False,
                               n_solves=n_solves, trace=trace, final_L_A=L, stalled=True)
        trace.append(InnerStep(L_A=L, eps=eps, theta=theta, gap=gap, slack_defect=slack_defect))
        m = mixture(m, sol.m_T, theta)
        s = s_next
    raise AssertionError("unreachable")


def outer_loop(problem: Problem, config: AlmConfig, m_init: DiscreteMeasure | None = None) -> AlmReport:
    F, G = problem.F, problem.G
    N = problem.n_constraints
    c = config.c0
    state = AlmState(
        m=problem.m0 if m_init is None else m_init,
        s=np.zeros(N),
        lam=np.zeros(N),
        c=c,
        eta=1.0 / c ** config.eta_exponent,
        omega=1.0 / c,
    )
    records: list[OuterRecord] = []
    inner_results: list[InnerResult] = []
    n_solves = 0
    converged = False
    for k in range(config.max_outer):
        res = inner_loop(state.m, state.s, state.lam, state.c, state.omega, problem, config)
        inner_results.append(res)
        n_solves += res.n_solves
        if res.stalled:
            log.info("inner loop stalled at outer k=%d (eps=%.3g > omega=%.3g)", k, res.eps, state.omega)
        elif not res.converged:
            log.warning("inner loop hit max_inner=%d at outer k=%d (eps=%.3g)",
                        config.max_inner, k, res.eps)
        r = G(res.m) + res.s
        rnorm = float(np.linalg.norm(r))
        updated = rnorm <= (state.omega if config.penalty_test == "omega" else state.eta)
        c_used, eta_used, omega_used = state.c, state.eta, state.omega
        if updated:
            lam = state.lam + state.c * r
            if rnorm <= config.eta_star and res.eps <= config.omega_star:
                converged = True
                eta, omega, c = state.eta, state.omega, state.c
            else:
                c = state.c
                eta = state.eta / config.eta_shrink
                omega = state.omega / config.omega_shrink
                if config.omega_floor:
                    omega = max(omega, config.omega_star)
        else:
            lam = state.lam
            c = state.c * config.penalty_growth
            eta = 1.0 / c ** config.eta_exponent
            omega = 1.0 / c
        records.append(OuterRecord(k=k, residual_norm=rnorm, eps=res.eps, c=c_used, eta=eta_used,
                                   omega=omega_used, lam=tuple(float(v) for v in lam),
                                   multiplier_updated=updated, inner_iterations=res.inner_iterations,
                                   inner_converged=res.converged,
                                   inner_stalled=res.stalled))
        log.info("outer %d: |G+s|=%.3e eps=%.3e c=%g lam=%s", k, rnorm, res.eps, c_used, lam)
        state = AlmState(m=res.m, s=res.s, lam=lam, c=c, eta=eta, omega=omega, k=k + 1)
        if converged:
            break

    rep = fn.lagrangian_rep(F, G, state.m, state.lam)
    final = problem.solve(rep)
    n_solves += 1
    tol = max(config.eta_star, config.omega_star)
    cert = certify(final.m_T, state.lam, problem, tol=tol)
    try:
        bound_it, refusal_it = gap_bound(state.m, state.lam, problem, tol=tol), None
    except CertificateRefused as exc:
        bound_it, refusal_it = None, str(exc)
    return AlmReport(
        converged=converged,
        lam=state.lam,
        feedback=final.feedback,
        value_field=final.V,
        m_final=final.m_T,
        m_last=state.m,
        s_last=state.s,
        c=state.c,
        n_standard_solves=n_solves,
        outer=records,
        inner=inner_results,
        constraint_final=G(final.m_T),
        cost_final=float(F(final.m_T)[0]),
        vi_residual=cert.vi_residual,
        certificate=cert,
        gap_bound_iterate=bound_it,
        gap_bound_iterate_refusal=refusal_it,
        status="converged" if converged else "max_outer exceeded",
    )
