"""Numerics for the heat equation with a memory nonlinearity on the Heisenberg group."""

__version__ = "0.1.0"

from .errors import DimensionMismatchError, GridError, HeisenlabError, NumericalFailure, UnderflowError
from .group import GroupPoint, dilate, group_inverse, group_multiply, homogeneous_dimension, koranyi_distance, koranyi_norm
from .grid import GridField, GridSpec
from .kernel import KernelQuadrature, kernel_value, sample_kernel
from .semigroup import SemigroupBackend, apply_semigroup
from .fractional import FracScheme, TimeSeries
from .solver import SolveConfig, SolveResult, solve
from .exponents import ExponentReport, exponents

__all__ = [
    "__version__",
    "DimensionMismatchError", "GridError", "HeisenlabError", "NumericalFailure", "UnderflowError",
    "GroupPoint", "dilate", "group_inverse", "group_multiply", "homogeneous_dimension",
    "koranyi_distance", "koranyi_norm",
    "GridField", "GridSpec",
    "KernelQuadrature", "kernel_value", "sample_kernel",
    "SemigroupBackend", "apply_semigroup",
    "FracScheme", "TimeSeries",
    "SolveConfig", "SolveResult", "solve",
    "ExponentReport", "exponents",
]
