"""A posteriori optimality certificates for a candidate terminal law."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import functionals as fn
from .measure import DiscreteMeasure, moment


class CertificateRefused(ValueError):
    """Preconditions of the optimality-gap bound do not hold."""


@dataclass(frozen=True)
class OptimalityCertificate:
    vi_residual: float
    constraint_values: tuple[float, ...]
    multiplier: tuple[float, ...]
    complementarity_defects: tuple[float, ...]
    gap_bound: float | None = None
    gap_bound_refusal: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def vi_residual(m_hat: DiscreteMeasure, lam, problem, rep_shift: float = 0.0) -> float:
    """``-inf_m DL(m_hat, lam)(m - m_hat)`` over laws reachable on the chain.

    One standard solve with terminal cost ``DL(m_hat, lam, .)``.  ``rep_shift``
    adds a constant to the representative; the result does not depend on it.
    """
    rep = fn.lagrangian_rep(problem.F, problem.G, m_hat, lam) + rep_shift
    return moment(m_hat, rep) - problem.solve(rep).value


def complementarity_check(G_values, lam, tol: float) -> np.ndarray:
    """``|lam_i|`` for strictly inactive constraints (``G_i < -tol``), 0 otherwise."""
    G_values = np.atleast_1d(np.asarray(G_values, dtype=float))
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return np.where(G_values < -tol, np.abs(lam), 0.0)


def _check_gap_preconditions(m_hat, lam, problem, tol):
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    for f in (problem.F, problem.G):
        if not f.convex:
            raise CertificateRefused(f"functional {f.name or f!r} is not declared convex")
    if np.any(lam < -tol):
        raise CertificateRefused(f"negative multiplier {lam}")
    g = np.atleast_1d(problem.G(m_hat))
    if np.any(g > tol):
        raise CertificateRefused(f"candidate is infeasible: G = {g}")
    defects = complementarity_check(g, lam, tol)
    if np.any(defects > tol):
        raise CertificateRefused(f"complementarity defect {defects}")


def gap_bound(m_hat: DiscreteMeasure, lam, problem, tol: float = 1e-6) -> float:
    """Upper bound on ``F(m_hat) - Val(P)`` for convex problems.

    Raises
    ------
    CertificateRefused
        If a functional is not declared convex, ``lam`` has a component below
        ``-tol``, ``m_hat`` violates a constraint by more than ``tol``, or
        complementarity fails by more than ``tol``.
    """
    _check_gap_preconditions(m_hat, lam, problem, tol)
    return vi_residual(m_hat, lam, problem)


def certify(m_hat: DiscreteMeasure, lam, problem, tol: float) -> OptimalityCertificate:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    g = np.atleast_1d(problem.G(m_hat))
    res = vi_residual(m_hat, lam, problem)
    bound, refusal = None, None
    try:
        _check_gap_preconditions(m_hat, lam, problem, tol)
        bound = res
    except CertificateRefused as exc:
        refusal = str(exc)
    return OptimalityCertificate(
        vi_residual=float(res),
        constraint_values=tuple(float(v) for v in g),
        multiplier=tuple(float(v) for v in lam),
        complementarity_defects=tuple(float(v) for v in complementarity_check(g, lam, tol)),
        gap_bound=bound,
        gap_bound_refusal=refusal,
    )
