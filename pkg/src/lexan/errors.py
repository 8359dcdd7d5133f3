"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``code`` used by the CLI when it
emits structured error documents.
"""

from __future__ import annotations


class LexanError(Exception):
    """Base class for all library errors."""

    code = "error"


class ValidationError(LexanError, ValueError):
    """Input does not satisfy a documented precondition."""

    code = "validation"


class DomainError(ValidationError):
    """A point lies outside the domain of a scale or expression."""

    code = "domain"


class ZeroExponentError(ValidationError):
    code = "zero_exponent"


class MismatchedScaleError(ValidationError):
    code = "mismatched_scale"


class EmptySumError(ValidationError):
    code = "empty_sum"


class RangeError(ValidationError):
    """A base function value leaves the unit box of a prepared form."""

    code = "range"


class EvaluationError(ValidationError):
    code = "evaluation"


class CertificateError(ValidationError):
    code = "certificate"


class InsufficientOrderError(ValidationError):
    code = "insufficient_order"


class ExprSyntaxError(ValidationError):
    """Parse failure; ``position`` is a 0-based character offset."""

    code = "syntax"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownPrimitiveError(ValidationError):
    code = "unknown_primitive"


class UnboundVariableError(ValidationError):
    code = "unbound_variable"


class NonDifferentiablePrimitiveError(ValidationError):
    code = "non_differentiable"


class ResampleLimitError(LexanError):
    code = "resample_limit"


class SingularDesignError(ValidationError):
    code = "singular_design"
