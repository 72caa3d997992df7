"""Functionals of the form ``Psi(int phi dm)`` and the (augmented) Lagrangian.

A :class:`MomentFunctional` evaluates ``Psi`` on the vector of moments
``z_k = int phi_k dm``.  Its derivative representative is the grid function
``x -> DPsi(z) . phi(x)``, one per output component.  Representatives are only
defined up to an additive constant; nothing here normalises them, and every
consumer (argmin in the standard problem, differences of moments) is shift
invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .lattice import Lattice
from .measure import DiscreteMeasure


class EvaluationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class MomentFunctional:
    """``m -> psi(z(m))`` with ``z(m) = (int phi_1 dm, ..., int phi_K dm)``.

    Parameters
    ----------
    phis : sequence of callables
        Integrands, vectorised over node coordinates.
    psi : callable
        Maps moment arrays of shape ``(..., K)`` to outputs of shape ``(..., q)``.
        Must broadcast over leading axes; the line search relies on that.
    dpsi : callable
        Jacobian, ``(K,) -> (q, K)``.
    convex : bool
        Declared convexity on the space of measures, used by the gap certificate.
    """

    phis: Sequence[Callable[[np.ndarray], np.ndarray]]
    psi: Callable[[np.ndarray], np.ndarray]
    dpsi: Callable[[np.ndarray], np.ndarray]
    convex: bool = False
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_components(self) -> int:
        return len(self.phis)

    def grid_phis(self, lattice: Lattice) -> np.ndarray:
        """Integrands sampled on the nodes, shape ``(K, nx)``."""
        key = (lattice.x_min, lattice.x_max, lattice.nx)
        if key not in self._cache:
            arr = np.stack([np.broadcast_to(np.asarray(f(lattice.x), dtype=float), lattice.x.shape)
                            for f in self.phis])
            arr.flags.writeable = False
            self._cache[key] = arr
        return self._cache[key]

    def moment_vector(self, m: DiscreteMeasure) -> np.ndarray:
        return self.grid_phis(m.lattice) @ m.weights

    def from_moments(self, z: np.ndarray) -> np.ndarray:
        out = np.asarray(self.psi(np.asarray(z, dtype=float)), dtype=float)
        if not np.all(np.isfinite(out)):
            raise EvaluationError(f"non-finite value of {self.name or 'functional'}")
        return out

    def __call__(self, m: DiscreteMeasure) -> np.ndarray:
        return self.from_moments(self.moment_vector(m))


def eval(f: MomentFunctional, m: DiscreteMeasure) -> np.ndarray:  # noqa: A001
    return f(m)


def derivative_rep(f: MomentFunctional, m: DiscreteMeasure) -> np.ndarray:
    """Derivative representatives, shape ``(q, nx)``."""
    J = np.atleast_2d(np.asarray(f.dpsi(f.moment_vector(m)), dtype=float))
    return J @ f.grid_phis(m.lattice)


def lagrangian_rep(F: MomentFunctional, G: MomentFunctional, m: DiscreteMeasure, lam) -> np.ndarray:
    """``DF(m, x) + <lam, DG(m, x)>`` on the nodes."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return derivative_rep(F, m)[0] + lam @ derivative_rep(G, m)


def constraint_residual(G: MomentFunctional, m: DiscreteMeasure, s) -> np.ndarray:
    return G(m) + np.asarray(s, dtype=float)


def aug_lagrangian(F, G, m, s, lam, c) -> float:
    r = constraint_residual(G, m, s)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return float(F(m)[0] + lam @ r + 0.5 * c * (r @ r))


def aug_lagrangian_rep(F, G, m, s, lam, c) -> np.ndarray:
    lam_eff = np.atleast_1d(np.asarray(lam, dtype=float)) + c * constraint_residual(G, m, s)
    return lagrangian_rep(F, G, m, lam_eff)


def slack_gradient(G, m, s, lam, c) -> np.ndarray:
    return np.atleast_1d(np.asarray(lam, dtype=float)) + c * constraint_residual(G, m, s)


# test-case functionals ---------------------------------------------------------

def expectation() -> MomentFunctional:
    """``F(m) = int x dm``."""
    return MomentFunctional(
        phis=(lambda x: x,),
        psi=lambda z: z[..., 0:1],
        dpsi=lambda z: np.array([[1.0]]),
        convex=True,
        name="expectation",
    )


def variance_cap(alpha: float) -> MomentFunctional:
    """``G(m) = Var(m) - alpha``."""

    def psi(z):
        return (z[..., 1] - z[..., 0] ** 2 - alpha)[..., None]

    def dpsi(z):
        return np.array([[-2.0 * z[0], 1.0]])

    return MomentFunctional(
        phis=(lambda x: x, lambda x: x * x),
        psi=psi,
        dpsi=dpsi,
        # variance is concave along mixtures
        convex=False,
        name="variance_cap",
    )


def expectation_floor(alpha: float) -> MomentFunctional:
    """``G(m) = alpha - int exp(-x^2) dm``."""
    return MomentFunctional(
        phis=(lambda x: np.exp(-x * x),),
        psi=lambda z: alpha - z[..., 0:1],
        dpsi=lambda z: np.array([[-1.0]]),
        convex=True,
        name="expectation_floor",
    )


def zero_constraint() -> MomentFunctional:
    return MomentFunctional(
        phis=(lambda x: np.zeros_like(x),),
        psi=lambda z: np.zeros_like(z[..., 0:1]),
        dpsi=lambda z: np.array([[0.0]]),
        convex=True,
        name="zero",
    )


CONSTRAINTS = {
    "variance_cap": variance_cap,
    "expectation_floor": expectation_floor,
}
