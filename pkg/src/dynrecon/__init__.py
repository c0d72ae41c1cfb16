"""Reconstruction of ODE systems from time-series data: a sparse polynomial
vector field is fit with a real-coded genetic algorithm, either inside fixed
search bounds or with the adaptive per-coefficient limit strategy (geometric
expand/shrink, zero-threshold freezing, stagnation-driven term elimination).
"""

from .dynamic_limits import DynConfig, DynamicFitResult, run_dynamic
from .ga import GAConfig, GeneBounds, ise_fitness, run_ga
from .library import Basis, Monomial, build_basis, evaluate_features, model_rhs
from .metrics import ise, mse, r2
from .signals import DerivativeSet, Trajectory, analytic_derivatives, differentiate
from .systems import (
    IntegratorConfig,
    VectorField,
    benchmark_coefficients,
    integrate,
    make_benchmark,
)

__all__ = [
    "Basis",
    "DerivativeSet",
    "DynConfig",
    "DynamicFitResult",
    "GAConfig",
    "GeneBounds",
    "IntegratorConfig",
    "Monomial",
    "Trajectory",
    "VectorField",
    "analytic_derivatives",
    "benchmark_coefficients",
    "build_basis",
    "differentiate",
    "evaluate_features",
    "integrate",
    "ise",
    "ise_fitness",
    "make_benchmark",
    "model_rhs",
    "mse",
    "r2",
    "run_dynamic",
    "run_ga",
]

__version__ = "0.1.0"
