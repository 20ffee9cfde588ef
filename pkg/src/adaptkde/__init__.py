"""Pointwise adaptive kernel density estimation over bandwidths and independence structures."""

from .estimators import SampleMatrix, auxiliary_estimate, marginal_estimate, product_estimate
from .kernels import HigherOrderKernel, make_kernel
from .partitions import Partition, compose, enumerate_partitions, project
from .selection import CandidateSet, EmptyCandidateSetError, GridConfig, SelectionResult, build_candidates, select

__all__ = [
    "SampleMatrix", "auxiliary_estimate", "marginal_estimate", "product_estimate",
    "HigherOrderKernel", "make_kernel", "Partition", "compose", "enumerate_partitions", "project",
    "CandidateSet", "EmptyCandidateSetError", "GridConfig", "SelectionResult", "build_candidates", "select",
]
__version__ = "0.1.0"
