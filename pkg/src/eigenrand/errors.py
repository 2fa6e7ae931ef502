"""
Exceptions and warnings raised by eigenrand.

Hard precondition failures are exceptions. Numerical conditions that leave a
usable (but suspect) result are warnings, which the CLI collects into report
flags.
"""


class EigenrandError(Exception):
    """Base class for all eigenrand errors."""


class DomainError(EigenrandError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class GridMismatchError(EigenrandError, ValueError):
    """A basis or profile was requested on a quadrature rule of the wrong domain."""


class EigensolverError(EigenrandError, ArithmeticError):
    """The symmetric eigensolver behind |M| failed to converge."""


class CalibrationError(EigenrandError, RuntimeError):
    """A calibrated constant could not be found in its admissible range."""


class QuadratureWarning(UserWarning):
    """Adaptive quadrature stopped at its node cap before meeting tolerance."""


class TailTruncationWarning(QuadratureWarning):
    """A radial integrand has not decayed at the truncation radius."""


class DivergenceWarning(UserWarning):
    """A closed-form norm was requested for a sequence outside the space."""


# Raised by dependencies about their own APIs; never a numerical condition.
NON_NUMERICAL_WARNINGS = (DeprecationWarning, PendingDeprecationWarning, FutureWarning, ImportWarning, ResourceWarning)


def warning_flags(caught) -> list:
    """Report flags for warnings recorded by `warnings.catch_warnings(record=True)`."""
    return sorted(
        {f"{w.category.__name__}: {w.message}" for w in caught if not issubclass(w.category, NON_NUMERICAL_WARNINGS)}
    )
