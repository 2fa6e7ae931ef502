"""
eigenrand: spectral functions, random-matrix randomization of eigenfunction
series and PL^p norms, with a verification suite and a batch CLI.
"""
from .constants import get_constants
from .errors import (
    CalibrationError,
    DivergenceWarning,
    DomainError,
    EigenrandError,
    EigensolverError,
    GridMismatchError,
    QuadratureWarning,
    TailTruncationWarning,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "DivergenceWarning",
    "DomainError",
    "EigenrandError",
    "EigensolverError",
    "GridMismatchError",
    "QuadratureWarning",
    "TailTruncationWarning",
    "get_constants",
    "__version__",
]
