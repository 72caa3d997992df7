"""Probability measures on the grid nodes and the 1-D Wasserstein-1 distance."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .lattice import Lattice

SUM_TOL = 1e-12
_RENORM_DRIFT = 1e-13


class ShapeError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Dense weight vector on the nodes of ``lattice``.

    Weights are renormalised on construction if their sum drifts from 1 by more
    than 1e-13; anything further off than ``SUM_TOL`` is rejected.
    """

    weights: np.ndarray = field(repr=False)
    lattice: Lattice

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.lattice.nx,):
            raise ShapeError(f"expected {self.lattice.nx} weights, got shape {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = w.sum()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"weights sum to {total}, not 1")
        if abs(total - 1.0) > _RENORM_DRIFT:
            w /= total
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def x(self) -> np.ndarray:
        return self.lattice.x

    def mean(self) -> float:
        return moment(self, self.lattice.x)

    def variance(self) -> float:
        mu = self.mean()
        return moment(self, (self.lattice.x - mu) ** 2)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.weights)

    def support(self, tol: float = 0.0) -> np.ndarray:
        return self.lattice.x[self.weights > tol]

    def to_csv(self, path: str | Path) -> None:
        write_measure_csv(path, self)


def _same_lattice(m1: DiscreteMeasure, m2: DiscreteMeasure) -> None:
    if m1.lattice is not m2.lattice and m1.lattice != m2.lattice:
        raise ShapeError("measures live on different lattices")


def dirac(lattice: Lattice, x0: float) -> DiscreteMeasure:
    """Point mass at ``x0``, split linearly between the two bracketing nodes."""
    if not lattice.x_min <= x0 <= lattice.x_max:
        raise DomainError(f"x0={x0} outside [{lattice.x_min}, {lattice.x_max}]")
    pos = (x0 - lattice.x_min) / lattice.dx
    if abs(pos - round(pos)) < 1e-9:
        pos = float(round(pos))
    left = min(int(np.floor(pos)), lattice.nx - 2)
    w = pos - left
    weights = np.zeros(lattice.nx)
    weights[left] = 1.0 - w
    weights[left + 1] += w
    return DiscreteMeasure(weights, lattice)


def from_weights(lattice: Lattice, weights: Sequence[float]) -> DiscreteMeasure:
    return DiscreteMeasure(np.asarray(weights, dtype=float), lattice)


def uniform(lattice: Lattice, nodes: Sequence[int] | None = None) -> DiscreteMeasure:
    weights = np.zeros(lattice.nx)
    if nodes is None:
        weights[:] = 1.0
    else:
        weights[list(nodes)] = 1.0
    return DiscreteMeasure(weights / weights.sum(), lattice)


def mixture(m1: DiscreteMeasure, m2: DiscreteMeasure, theta: float) -> DiscreteMeasure:
    """``(1 - theta) m1 + theta m2``."""
    _same_lattice(m1, m2)
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta={theta} not in [0, 1]")
    if theta == 0.0:
        return m1
    if theta == 1.0:
        return m2
    w = (1.0 - theta) * m1.weights + theta * m2.weights
    return DiscreteMeasure(w, m1.lattice)


def moment(m: DiscreteMeasure, phi: np.ndarray) -> float:
    """Integral of the grid function ``phi`` against ``m``."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != m.weights.shape:
        raise ShapeError(f"grid function has shape {phi.shape}, expected {m.weights.shape}")
    return float(np.dot(m.weights, phi))


def moments(m: DiscreteMeasure, phis: np.ndarray) -> np.ndarray:
    """Moments of several grid functions stacked as rows of ``phis``."""
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    if phis.shape[1] != m.weights.shape[0]:
        raise ShapeError("grid function length mismatch")
    return phis @ m.weights


def wasserstein1(m1: DiscreteMeasure, m2: DiscreteMeasure) -> float:
    """Exact W1 on a uniform 1-D grid: ``dx * sum |CDF1 - CDF2|``."""
    _same_lattice(m1, m2)
    diff = np.cumsum(m1.weights - m2.weights)[:-1]
    return float(m1.lattice.dx * np.abs(diff).sum())


def empirical_wasserstein1(samples1, samples2) -> float:
    """W1 between two equal-size empirical measures, via order statistics.

    The inputs are sorted here if they are not already.
    """
    a = np.sort(np.asarray(samples1, dtype=float))
    b = np.sort(np.asarray(samples2, dtype=float))
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"sample counts differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ShapeError("empty samples")
    return float(np.mean(np.abs(a - b)))


def write_measure_csv(path: str | Path, m: DiscreteMeasure) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "weight"])
        for xi, wi in zip(m.lattice.x, m.weights):
            writer.writerow([repr(float(xi)), repr(float(wi))])
