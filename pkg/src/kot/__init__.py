"""Kernel-based optimal transport estimators via a safeguarded semismooth Newton solver.

The library assembles the finite-dimensional dual of the kernel OT problem
from samples and filling points, and solves the associated nonsmooth
root-finding problem with a regularized semismooth Newton method that is
safeguarded by an extragradient sequence.
"""

from kot.kernels import KernelSpec, SampleSet
from kot.problem import FillingPoints, IteratePair, ProblemData, assemble
from kot.solver import SolverConfig, SolverReport, solve, solve_pure_eg
from kot.newton import NewtonConfig
from kot.eg import EgConfig
from kot.datagen import MixtureSpec, sample_mixture, sobol_points

__version__ = "0.1.0"

__all__ = [
    "KernelSpec",
    "SampleSet",
    "FillingPoints",
    "IteratePair",
    "ProblemData",
    "assemble",
    "SolverConfig",
    "SolverReport",
    "solve",
    "solve_pure_eg",
    "NewtonConfig",
    "EgConfig",
    "MixtureSpec",
    "sample_mixture",
    "sobol_points",
]
