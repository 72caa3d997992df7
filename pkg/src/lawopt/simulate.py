"""Monte-Carlo simulation of the controlled SDE under grid feedbacks.

``branching_demo`` builds the delay-and-branch control: a constant control on
``[0, eps]``, then a branch chosen from the normalised Brownian increment over
``[0, eps]`` (standard normal quantile cells of probability ``theta_k``), and on
each branch the chosen feedback run with its clock and its observations delayed
by ``eps``.  The terminal law of that single control approaches the
``theta``-mixture of the individual terminal laws as ``eps -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .dp import ControlField
from .lattice import Dynamics, Lattice, reflect
from .measure import DiscreteMeasure, empirical_wasserstein1


@dataclass(frozen=True)
class PathEnsemble:
    n_paths: int
    dt_sim: float
    terminal_samples: np.ndarray = field(repr=False)
    seed: int
    sup_abs: np.ndarray = field(repr=False)  # max_t |X_t| per path

    def sup_moment(self, p: float = 2.0) -> float:
        return float(np.mean(self.sup_abs ** p))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x_T\n")
            fh.writelines(f"{float(v)!r}\n" for v in self.terminal_samples)


@dataclass(frozen=True)
class BranchingResult:
    distance: float
    branch_fractions: np.ndarray
    eps: float
    n_paths: int


def _nearest_node(x: np.ndarray, lattice: Lattice) -> np.ndarray:
    j = np.rint((x - lattice.x_min) / lattice.dx).astype(np.int64)
    return np.clip(j, 0, lattice.nx - 1)


def _lookup(fields: Sequence[ControlField], label: np.ndarray, step: int, x: np.ndarray) -> np.ndarray:
    lat = fields[0].lattice
    j = _nearest_node(x, lat)
    controls = np.asarray(lat.controls)
    if len(fields) == 1:
        return controls[fields[0].index[step, j]]
    table = np.stack([f.index[step] for f in fields])  # (K, nx)
    return controls[table[label, j]]


def _em_step(dyn: Dynamics, lat: Lattice, x, u, h, dw):
    y = x + dyn.drift(x, u) * h + dyn.volatility(x, u) * dw
    return np.clip(reflect(y, lat.x_min, lat.x_max), lat.x_min, lat.x_max)


def simulate_feedback(dyn: Dynamics, feedback: ControlField, x0: float, n_paths: int,
                      seed: int) -> PathEnsemble:
    """Euler-Maruyama on the lattice time grid, control read at the nearest node."""
    if n_paths <= 0:
        raise ValueError("n_paths must be positive")
    lat = feedback.lattice
    rng = np.random.default_rng(seed)
    x = np.full(n_paths, float(x0))
    sup = np.abs(x)
    sq = math.sqrt(lat.dt)
    zeros = np.zeros(n_paths, dtype=np.int64)
    for n in range(lat.nt):
        u = _lookup([feedback], zeros, n, x)
        x = _em_step(dyn, lat, x, u, lat.dt, sq * rng.standard_normal(n_paths))
        np.maximum(sup, np.abs(x), out=sup)
    return PathEnsemble(n_paths=n_paths, dt_sim=lat.dt, terminal_samples=x, seed=seed, sup_abs=sup)


def sample_measure(m: DiscreteMeasure, n: int) -> np.ndarray:
    """Deterministic quantile sample of size ``n`` from a grid measure (midpoint levels)."""
    levels = (np.arange(n) + 0.5) / n
    idx = np.searchsorted(m.cdf(), levels, side="left")
    return m.lattice.x[np.minimum(idx, m.lattice.nx - 1)]


def branch_thresholds(theta: Sequence[float]) -> np.ndarray:
    """Interior cut points ``r_1 < ... < r_{K-1}`` with ``P[r_{k-1} < Z < r_k] = theta_k``."""
    cum = np.cumsum(theta)[:-1]
    nd = NormalDist()
    return np.array([nd.inv_cdf(float(c)) for c in cum])


def branching_demo(dyn: Dynamics, controls: Sequence[ControlField], theta: Sequence[float],
                   eps: float, n_paths: int, seed: int, x0: float = 0.0,
                   u0: float = 0.0) -> BranchingResult:
    """Empirical W1 between the delay-and-branch terminal law and the theta-mixture.

    The mixture sample is coupled to the branched one: path ``i`` of the mixture
    runs control ``k_i`` from ``x0`` on the Brownian increments that path ``i`` of
    the branched control sees after ``eps``, extended by fresh noise.  Since
    ``k_i`` depends only on the increment over ``[0, eps]``, the coupled sample
    has exactly the mixture law.
    """
    theta = np.asarray(theta, dtype=float)
    if len(controls) != len(theta) or len(theta) == 0:
        raise ValueError("need one weight per control")
    if np.any(theta <= 0) or abs(theta.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must be positive and sum to 1, got {theta}")
    if n_paths <= 0:
        raise ValueError("n_paths must be positive")
    lat = controls[0].lattice
    T = lat.T
    if not 0.0 < eps < T:
        raise ValueError(f"eps must lie in (0, T={T})")
    rng = np.random.default_rng(seed)

    # [0, eps]: constant control u0
    n_sub = max(1, math.ceil(eps / lat.dt - 1e-12))
    h = eps / n_sub
    x = np.full(n_paths, float(x0))
    w_eps = np.zeros(n_paths)
    for _ in range(n_sub):
        dw = math.sqrt(h) * rng.standard_normal(n_paths)
        x = _em_step(dyn, lat, x, np.full(n_paths, float(u0)), h, dw)
        w_eps += dw
    label = np.searchsorted(branch_thresholds(theta), w_eps / math.sqrt(eps))
    fractions = np.bincount(label, minlength=len(theta)) / n_paths

    # [eps, T]: delayed control k driven by a shadow path started at x0
    horizon = T - eps
    n_act = math.ceil(horizon / lat.dt - 1e-12)
    h_last = horizon - (n_act - 1) * lat.dt
    shadow = np.full(n_paths, float(x0))
    for n in range(lat.nt):
        u = _lookup(controls, label, n, shadow)
        if n < n_act:
            h_act = lat.dt if n < n_act - 1 else h_last
            db_act = math.sqrt(h_act) * rng.standard_normal(n_paths)
            rest = lat.dt - h_act
            db = db_act + (math.sqrt(rest) * rng.standard_normal(n_paths) if rest > 0 else 0.0)
            x = _em_step(dyn, lat, x, u, h_act, db_act)
        else:
            db = math.sqrt(lat.dt) * rng.standard_normal(n_paths)
        shadow = _em_step(dyn, lat, shadow, u, lat.dt, db)

    return BranchingResult(distance=empirical_wasserstein1(x, shadow), branch_fractions=fractions,
                           eps=eps, n_paths=n_paths)


def fit_loglog_slope(eps: Sequence[float], distances: Sequence[float]) -> float:
    return float(np.polyfit(np.log(eps), np.log(distances), 1)[0])
