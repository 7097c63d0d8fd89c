"""Custom exceptions for the SEQPT tomography toolkit."""

from typing import Optional


class SeqptError(Exception):
    """Base class for all errors raised by the toolkit."""


class InvalidInputError(SeqptError, ValueError):
    """Raised when an argument lies outside its documented domain."""


class DimensionMismatchError(InvalidInputError):
    """Raised when operands have incompatible sizes."""


class DenseLimitError(InvalidInputError):
    """Raised when a dense oracle is requested beyond its qubit cap."""


class SingularMatrixError(SeqptError, ArithmeticError):
    """Raised when a GF(2) linear system has no unique solution."""


class EstimationError(InvalidInputError):
    """Raised when an estimator receives no usable data."""


class ChannelSpecError(InvalidInputError):
    """Raised when a channel description is malformed or unphysical."""

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}" if field else message)


class SynthesisError(SeqptError, RuntimeError):
    """Raised when change-of-basis synthesis breaks its guarantees."""


class InvariantViolation(SeqptError, RuntimeError):
    """Raised when an internal mathematical guarantee does not hold."""
