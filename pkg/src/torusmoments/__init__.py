"""Moments, kernel approximation, sum-of-squares support indicators and Wasserstein-1 transport on the torus."""

__version__ = "0.1.0"

from .kernels import KernelApproximation, KernelSpec, TrigPolynomial, best_delta_poly, convolve, fejer_abs_moment
from .measures import (CircleUniform, Discrete, Example1, GridDensity, Lebesgue, Mixture, MomentTable,
                       ParametricCurve, implicit_curve, random_discrete, sample_curve)
from .moment_matrix import ConvergenceError, MomentMatrix, SvdFactors, numerical_rank, svd
from .sos import SupportIndicator, sos_pair
from .transport import SemidiscreteTransport, w1_1d, w1_auto, w1_semidiscrete

__all__ = [
    "CircleUniform", "ConvergenceError", "Discrete", "Example1", "GridDensity", "KernelApproximation",
    "KernelSpec", "Lebesgue", "Mixture", "MomentMatrix", "MomentTable", "ParametricCurve",
    "SemidiscreteTransport", "SupportIndicator", "SvdFactors", "TrigPolynomial", "best_delta_poly",
    "convolve", "fejer_abs_moment", "implicit_curve", "numerical_rank", "random_discrete", "sample_curve",
    "sos_pair", "svd", "w1_1d", "w1_auto", "w1_semidiscrete",
]
