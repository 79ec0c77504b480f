"""Epigraph and hypograph indexes for multivariate functional data, and an
index-based clustering pipeline built on top of them."""

from .core import (
    ArgumentError,
    DegeneracyError,
    DimensionError,
    EHyClusError,
    FormatError,
    Grid,
    MultivariateFunctionalSample,
    NumericalError,
    Partition,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "DegeneracyError",
    "DimensionError",
    "EHyClusError",
    "FormatError",
    "Grid",
    "MultivariateFunctionalSample",
    "NumericalError",
    "Partition",
    "__version__",
]
