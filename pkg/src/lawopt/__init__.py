"""Optimal control of the law of a controlled diffusion under moment constraints.

A Markov chain approximation turns the problem into a sequence of standard
dynamic programs; an augmented Lagrangian method with a Frank-Wolfe inner loop
handles the law constraints.
"""

from .alm import AlmConfig, AlmReport, Problem, outer_loop
from .dp import ControlField, solve_standard
from .lattice import ConfigurationError, Dynamics, Lattice, build_stencils
from .measure import DiscreteMeasure, dirac, mixture, wasserstein1

__all__ = [
    "AlmConfig", "AlmReport", "ConfigurationError", "ControlField", "DiscreteMeasure", "Dynamics",
    "Lattice", "Problem", "build_stencils", "dirac", "mixture", "outer_loop", "solve_standard",
    "wasserstein1",
]
__version__ = "0.1.0"
