"""Wasserstein-1 distances: exact in one dimension, semidiscrete in two."""

from .bernoulli import BernoulliProfile, bernoulli_sawtooth, median_offset, w1_1d
from .dispatch import w1_auto
from .semidiscrete import (SemidiscreteProblem, SemidiscreteTransport, TransportResult, laguerre_partition,
                           semidiscrete_objective, w1_semidiscrete)

__all__ = [
    "BernoulliProfile", "SemidiscreteProblem", "SemidiscreteTransport", "TransportResult",
    "bernoulli_sawtooth", "laguerre_partition", "median_offset", "semidiscrete_objective", "w1_1d",
    "w1_auto", "w1_semidiscrete",
]
