"""Space/time/control grid and the two-branch controlled Markov chain.

The controlled SDE ``dX = b(X,u) dt + sigma(X,u) dW`` is replaced on the grid by
a chain which, from node ``x_j`` under control ``u``, jumps to
``x_j + b dt +/- sigma sqrt(dt)`` with probability 1/2 each.  Each branch is
folded back into ``[x_min, x_max]`` (reflecting boundary) and then split
between its two neighbouring nodes by linear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

# successor points closer than this (in units of dx) to a node are snapped onto it
_SNAP = 1e-9


class ConfigurationError(ValueError):
    """Invalid grid or dynamics configuration."""


@dataclass(frozen=True)
class Lattice:
    """Uniform grid on ``[x_min, x_max]`` with ``nt`` time steps and a finite control set."""

    x_min: float
    x_max: float
    nx: int
    dt: float
    nt: int
    controls: tuple[float, ...]

    def __post_init__(self):
        if self.nx < 2 or not self.x_max > self.x_min:
            raise ConfigurationError("need nx >= 2 and x_max > x_min")
        if not self.dt > 0 or self.nt < 1:
            raise ConfigurationError("need dt > 0 and nt >= 1")
        if len(self.controls) == 0:
            raise ConfigurationError("control set is empty")
        if list(self.controls) != sorted(self.controls):
            raise ConfigurationError("controls must be sorted")

    @classmethod
    def uniform(cls, x_min, x_max, dx, dt, T, u_min, u_max, du) -> "Lattice":
        """Build a lattice from spacings, as the run configuration states them."""
        if not (dx > 0 and dt > 0 and T > 0):
            raise ConfigurationError("dx, dt and T must be positive")
        n_cells = (x_max - x_min) / dx
        if abs(n_cells - round(n_cells)) > 1e-9 * max(1.0, n_cells):
            raise ConfigurationError(f"(x_max - x_min)/dx = {n_cells} is not an integer")
        n_steps = T / dt
        if abs(n_steps - round(n_steps)) > 1e-9 * max(1.0, n_steps):
            raise ConfigurationError(f"T/dt = {n_steps} is not an integer")
        if u_max < u_min:
            raise ConfigurationError("u_max < u_min")
        if u_max == u_min:
            controls = (float(u_min),)
        else:
            if not du > 0:
                raise ConfigurationError("du must be positive")
            n_u = (u_max - u_min) / du
            if abs(n_u - round(n_u)) > 1e-9 * max(1.0, n_u):
                raise ConfigurationError(f"(u_max - u_min)/du = {n_u} is not an integer")
            controls = tuple(
                float(np.round(u_min + k * du, 12)) for k in range(int(round(n_u)) + 1)
            )
        return cls(
            x_min=float(x_min),
            x_max=float(x_max),
            nx=int(round(n_cells)) + 1,
            dt=float(dt),
            nt=int(round(n_steps)),
            controls=controls,
        )

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def T(self) -> float:
        return self.nt * self.dt

    @cached_property
    def x(self) -> np.ndarray:
        """Node coordinates."""
        nodes = self.x_min + self.dx * np.arange(self.nx)
        nodes[-1] = self.x_max
        nodes.flags.writeable = False
        return nodes

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    def control_index(self, u: float) -> int:
        """Index of the control value ``u`` in the control set."""
        idx = int(np.argmin(np.abs(np.asarray(self.controls) - u)))
        if abs(self.controls[idx] - u) > 1e-9:
            raise ValueError(f"{u} is not in the control set")
        return idx


@dataclass(frozen=True)
class Dynamics:
    """Drift and volatility; both callables are vectorised in ``(x, u)``."""

    drift: Callable[[np.ndarray, np.ndarray], np.ndarray]
    volatility: Callable[[np.ndarray, np.ndarray], np.ndarray]

    @classmethod
    def controlled_drift(cls, sigma: float = 1.0) -> "Dynamics":
        """``dX = u dt + sigma dW``, the dynamics of both test cases."""
        return cls(
            drift=lambda x, u: np.broadcast_to(np.asarray(u, dtype=float), np.broadcast(x, u).shape),
            volatility=lambda x, u: np.full(np.broadcast(x, u).shape, float(sigma)),
        )

    def lipschitz_ratio(self, lattice: Lattice) -> float:
        """Largest sampled finite-difference ratio of ``b`` and ``sigma`` over grid x controls."""
        x = lattice.x
        u = np.asarray(lattice.controls)
        X, U = np.meshgrid(x, u)
        b = self.drift(X, U)
        s = self.volatility(X, U)
        ratio = 0.0
        dx = np.diff(x)
        ratio = max(ratio, float(np.max((np.abs(np.diff(b, axis=1)) + np.abs(np.diff(s, axis=1))) / dx)))
        if len(u) > 1:
            du = np.diff(u)[:, None]
            ratio = max(ratio, float(np.max((np.abs(np.diff(b, axis=0)) + np.abs(np.diff(s, axis=0))) / du)))
        return ratio

    def check_lipschitz(self, lattice: Lattice, K: float) -> None:
        ratio = self.lipschitz_ratio(lattice)
        if ratio > K:
            raise ConfigurationError(f"sampled Lipschitz ratio {ratio:.3g} exceeds K={K}")


@dataclass(frozen=True)
class ControlStencil:
    """Transition table of the chain.

    Branch ``b`` (``b = 0`` for ``-sigma sqrt(dt)``, ``1`` for ``+``) of node ``j``
    under control ``controls[a]`` lands between nodes ``left[j, a, b]`` and
    ``left[j, a, b] + 1`` at fractional position ``frac[j, a, b]``; each branch has
    probability 1/2.  Node-major layout keeps the min over controls cache-friendly.
    """

    lattice: Lattice
    left: np.ndarray = field(repr=False)  # int32, (nx, n_controls, 2)
    frac: np.ndarray = field(repr=False)  # float64, (nx, n_controls, 2)

    @property
    def index(self) -> np.ndarray:
        """Successor nodes, ``(nx, n_controls, 4)``: left/right node of each branch."""
        left = self.left.astype(np.int64)
        return np.stack([left[..., 0], left[..., 0] + 1, left[..., 1], left[..., 1] + 1], axis=-1)

    @property
    def prob(self) -> np.ndarray:
        """Probabilities matching :attr:`index`."""
        f = self.frac
        return 0.5 * np.stack([1.0 - f[..., 0], f[..., 0], 1.0 - f[..., 1], f[..., 1]], axis=-1)

    def expectation(self, values: np.ndarray) -> np.ndarray:
        """One-step conditional expectation of ``values``, shape ``(nx, n_controls)``."""
        return np.einsum("jar,jar->ja", values[self.index], self.prob)

    def row(self, j: int, a: int) -> dict[int, float]:
        out: dict[int, float] = {}
        for i, p in zip(self.index[j, a], self.prob[j, a]):
            if p != 0.0:
                out[int(i)] = out.get(int(i), 0.0) + float(p)
        return out

    def transition_matrix(self, a: int) -> np.ndarray:
        """Dense ``nx x nx`` kernel for control index ``a``; only for small grids."""
        nx = self.lattice.nx
        P = np.zeros((nx, nx))
        rows = np.repeat(np.arange(nx), 4)
        np.add.at(P, (rows, self.index[:, a].ravel()), self.prob[:, a].ravel())
        return P


def reflect(y: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Fold points once across the boundaries of ``[lo, hi]``."""
    y = np.where(y > hi, 2.0 * hi - y, y)
    y = np.where(y < lo, 2.0 * lo - y, y)
    return y


def _interpolate(y: np.ndarray, lattice: Lattice) -> tuple[np.ndarray, np.ndarray]:
    pos = (y - lattice.x_min) / lattice.dx
    nearest = np.round(pos)
    pos = np.where(np.abs(pos - nearest) < _SNAP, nearest, pos)
    pos = np.clip(pos, 0.0, lattice.nx - 1)
    left = np.minimum(np.floor(pos).astype(np.int64), lattice.nx - 2)
    w = pos - left
    return left, w


def build_stencils(lattice: Lattice, dyn: Dynamics) -> ControlStencil:
    x = lattice.x
    u = np.asarray(lattice.controls, dtype=float)
    X, U = np.meshgrid(x, u, indexing="ij")  # shape (nx, n_controls)
    b = np.asarray(dyn.drift(X, U), dtype=float)
    s = np.abs(np.asarray(dyn.volatility(X, U), dtype=float))
    reach = np.abs(b) * lattice.dt + s * math.sqrt(lattice.dt)
    width = lattice.x_max - lattice.x_min
    if np.any(reach > width):
        raise ConfigurationError(
            f"one-step displacement {reach.max():.3g} exceeds the domain width {width:.3g}"
        )

    left = np.empty(X.shape + (2,), dtype=np.int32)
    frac = np.empty(X.shape + (2,), dtype=float)
    for branch, sign in enumerate((-1.0, 1.0)):
        y = X + b * lattice.dt + sign * s * math.sqrt(lattice.dt)
        y = reflect(y, lattice.x_min, lattice.x_max)
        left[..., branch], frac[..., branch] = _interpolate(y, lattice)
    left.flags.writeable = False
    frac.flags.writeable = False
    return ControlStencil(lattice=lattice, left=left, frac=frac)
