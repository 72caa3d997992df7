"""Standard problems ``inf_u E[phi(X_T)]`` on the chain.

Backward induction gives the value function and a Markov feedback; the forward
Chapman-Kolmogorov recursion pushes an initial law through that feedback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .lattice import ControlStencil, Lattice
from .measure import DiscreteMeasure, ShapeError, moment


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class ValueField:
    values: np.ndarray = field(repr=False)  # (nt + 1, nx)

    def at_time(self, step: int) -> np.ndarray:
        return self.values[step]


@dataclass(frozen=True)
class ControlField:
    """Feedback ``u(t, x)`` stored as indices into ``lattice.controls``; shape ``(nt, nx)``."""

    lattice: Lattice
    index: np.ndarray = field(repr=False)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.lattice.controls)[self.index]

    @classmethod
    def constant(cls, lattice: Lattice, u: float) -> "ControlField":
        a = lattice.control_index(u)
        return cls(lattice, np.full((lattice.nt, lattice.nx), a, dtype=np.int64))


@dataclass(frozen=True)
class StandardSolution:
    value: float
    m_T: DiscreteMeasure
    feedback: ControlField
    V: ValueField


@njit(cache=True)
def _bellman_sweep(phi, left, frac, V, feedback):
    nx, n_a, n_b = left.shape
    nt = feedback.shape[0]
    V[nt] = phi
    for t in range(nt - 1, -1, -1):
        nxt = V[t + 1]
        for j in range(nx):
            best = np.inf
            best_a = 0
            for a in range(n_a):
                q = 0.0
                for b in range(n_b):
                    i = left[j, a, b]
                    v0 = nxt[i]
                    q += v0 + frac[j, a, b] * (nxt[i + 1] - v0)
                q *= 0.5
                # strict comparison: ties keep the smallest control
                if q < best:
                    best = q
                    best_a = a
            V[t, j] = best
            feedback[t, j] = best_a


@njit(cache=True)
def _forward_step(w, a_t, left, frac, out):
    nx, _, n_b = left.shape
    out[:] = 0.0
    for j in range(nx):
        half = 0.5 * w[j]
        if half == 0.0:
            continue
        a = a_t[j]
        for b in range(n_b):
            i = left[j, a, b]
            f = frac[j, a, b]
            out[i] += (1.0 - f) * half
            out[i + 1] += f * half


def hjb_backward(stencils: ControlStencil, phi: np.ndarray) -> tuple[ValueField, ControlField]:
    """Dynamic programming ``V_t = min_a E_a[V_{t+1}]``, ``V_T = phi``.

    Ties in the minimisation go to the smallest control value.
    """
    lat = stencils.lattice
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (lat.nx,):
        raise ShapeError(f"terminal cost has shape {phi.shape}, expected ({lat.nx},)")
    if not np.all(np.isfinite(phi)):
        raise InputError("terminal cost contains non-finite values")

    V = np.empty((lat.nt + 1, lat.nx))
    feedback = np.empty((lat.nt, lat.nx), dtype=np.int64)
    _bellman_sweep(phi, stencils.left, stencils.frac, V, feedback)
    return ValueField(V), ControlField(lat, feedback)


def push_forward(
    m0: DiscreteMeasure, feedback: ControlField, stencils: ControlStencil
) -> list[DiscreteMeasure]:
    """Laws of the chain at every step ``0..nt`` under ``feedback``."""
    lat = stencils.lattice
    if m0.lattice != lat or feedback.lattice != lat:
        raise ShapeError("measure, feedback and stencils must share a lattice")
    out = [m0]
    w = m0.weights
    for t in range(lat.nt):
        nxt = np.empty(lat.nx)
        _forward_step(w, np.ascontiguousarray(feedback.index[t]), stencils.left, stencils.frac, nxt)
        m = DiscreteMeasure(nxt, lat)
        w = m.weights
        out.append(m)
    return out


def solve_standard(stencils: ControlStencil, phi: np.ndarray, m0: DiscreteMeasure) -> StandardSolution:
    V, fb = hjb_backward(stencils, phi)
    m_T = push_forward(m0, fb, stencils)[-1]
    return StandardSolution(value=moment(m0, V.values[0]), m_T=m_T, feedback=fb, V=V)


def policy_value(
    stencils: ControlStencil, phi: np.ndarray, m0: DiscreteMeasure, feedback: ControlField
) -> float:
    """``E[phi(X_T)]`` under an arbitrary feedback."""
    return moment(push_forward(m0, feedback, stencils)[-1], phi)
