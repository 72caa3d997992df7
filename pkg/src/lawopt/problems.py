"""The two benchmark problems: minimise ``E[X_T]`` for ``dX = u dt + dW``, ``u in [-2, 2]``."""

from __future__ import annotations

from . import functionals as fn
from .alm import Problem
from .lattice import Dynamics, Lattice, build_stencils
from .measure import dirac

FULL_GRID = dict(x_min=-5.0, x_max=5.0, dx=1e-3, dt=1e-2, T=1.0, u_min=-2.0, u_max=2.0, du=0.1)
COARSE_GRID = dict(FULL_GRID, dx=1e-2, du=0.2)


def make_problem(constraint: str, alpha: float = 0.4, lattice: Lattice | None = None,
                 x0: float = 0.0, sigma: float = 1.0) -> Problem:
    if constraint not in fn.CONSTRAINTS:
        raise KeyError(f"unknown problem {constraint!r}; expected one of {sorted(fn.CONSTRAINTS)}")
    if lattice is None:
        lattice = Lattice.uniform(**COARSE_GRID)
    stencils = build_stencils(lattice, Dynamics.controlled_drift(sigma))
    return Problem(
        stencils=stencils,
        F=fn.expectation(),
        G=fn.CONSTRAINTS[constraint](alpha),
        m0=dirac(lattice, x0),
    )


def tc1(lattice: Lattice | None = None, alpha: float = 0.4) -> Problem:
    return make_problem("variance_cap", alpha, lattice)


def tc2(lattice: Lattice | None = None, alpha: float = 0.4) -> Problem:
    return make_problem("expectation_floor", alpha, lattice)
