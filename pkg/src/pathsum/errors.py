"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PathsumError(Exception):
    """Base class for all errors raised by this package."""


class ResourceLimit(PathsumError):
    """A configured size or enumeration cap was exceeded."""


class DimensionMismatch(PathsumError):
    """Operator dimensions do not line up for composition or comparison."""


class NotHalfInteger(PathsumError):
    """A phase polynomial has a coefficient finer than 1/2 where halves are required."""


class NotApplicable(PathsumError):
    """The requested rewrite rule does not apply to the given variable."""


class NotNormalizable(PathsumError):
    """No rule applies and some path variable owns no output qubit."""

    def __init__(self, message: str, stuck: tuple = ()):
        super().__init__(message)
        self.stuck = tuple(stuck)


class NotClifford(PathsumError):
    """Operation requires a (square) Clifford path sum."""


class NonUnitary(PathsumError):
    """The path sum does not represent a unitary operator."""


class NotIsometry(PathsumError):
    """The path sum does not represent an isometry."""


class MalformedNormalForm(PathsumError):
    """A term violates the degree/coefficient constraints of Clifford normal form."""


class SynthesisIncomplete(PathsumError):
    """The general synthesis heuristic gave up; carries the residual sum."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


class ResidualNotPermutation(PathsumError):
    """The path-variable-free residual could not be reduced to the identity."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


class CircuitSyntaxError(PathsumError):
    """Syntax error in the circuit text format."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}" if line else message)
        self.line = line
        self.column = column


class WidthError(PathsumError):
    """A gate references a qubit outside the declared circuit width."""


class SumFormatError(PathsumError):
    """Malformed or non-canonical path-sum JSON."""
