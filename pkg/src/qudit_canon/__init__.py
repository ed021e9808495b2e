"""Discrete position, momentum and Fourier operators on an odd-dimensional
qudit, the states built from them, and metrics for how closely each state
satisfies the canonical commutation relation."""

from .core import (
    ATOL_NOISE,
    RTOL_TABLE,
    ConvergenceError,
    DimensionError,
    GridMismatchError,
    GridSpec,
    NormalizationError,
    OperatorMatrix,
    SpectralDecomposition,
    StateVector,
    StructureError,
    make_grid,
)
from .states import TruncationError

__version__ = "0.1.0"

__all__ = [
    "ATOL_NOISE",
    "RTOL_TABLE",
    "ConvergenceError",
    "DimensionError",
    "GridMismatchError",
    "GridSpec",
    "NormalizationError",
    "OperatorMatrix",
    "SpectralDecomposition",
    "StateVector",
    "StructureError",
    "TruncationError",
    "make_grid",
    "__version__",
]
