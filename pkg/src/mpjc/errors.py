"""Exception types raised by the engine."""


class MPJCError(Exception):
    """Base class for all engine errors."""


class InvalidParameterError(MPJCError, ValueError):
    pass


class CaseMismatchError(MPJCError, ValueError):
    """An analytic routine was called for a scenario outside its case."""


class AnalyticDomainError(MPJCError, ValueError):
    """A closed form was requested outside its validity domain (e.g. Δ ≠ 0)."""


class CouplingOverflowError(MPJCError, OverflowError):
    """A factorial-ratio coupling does not fit in a float."""

    def __init__(self, entry, message=None):
        self.entry = entry
        super().__init__(message or f"coupling overflow at matrix entry {entry}")


class NumericError(MPJCError, ArithmeticError):
    pass


class HermiticityError(NumericError):
    pass


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class IntegratorError(NumericError):
    pass


class TruncationError(NumericError):
    """Population leaked to the edge of the truncated Fock space."""


class TruncationWarning(RuntimeWarning):
    pass
