class SummaError(Exception):
    """Base class for errors raised by the summa toolkit."""


class EnumerationCapError(SummaError, ValueError):
    """Raised when an exhaustive sign enumeration would exceed the configured cap."""

    def __init__(self, bits: int, cap: int, what: str = "sign enumeration"):
        self.bits = bits
        self.cap = cap
        super().__init__(f"{what} needs 2^{bits} patterns but the cap is 2^{cap}")


class NotHilbertError(SummaError, ValueError):
    """Raised when an operation needs ℓ_2 spaces and got something else."""


class DegenerateInputError(SummaError, ValueError):
    """Raised on empty shapes, mismatched dimensions or zero denominators."""


class NoCertificateError(SummaError):
    """Raised when the Pietsch program has no feasible point on the given dual set."""


class InvalidCertificateError(SummaError, ValueError):
    """Raised when a Pietsch certificate fails its domination check."""


class UnsupportedRegimeError(SummaError, ValueError):
    """Raised for (p, q) cells the diagonal classification tables do not cover."""


class NumericalCheckError(SummaError, ArithmeticError):
    """Raised when an internal consistency check of a factorisation fails."""


class MatrixFormatError(SummaError, ValueError):
    """Raised when a matrix or family file does not parse.

    `line` and `column` are 1-based and point at the offending token.
    """

    def __init__(self, message: str, *, line: int = 1, column: int = 1, source: str = "<input>"):
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


class UsageError(SummaError, ValueError):
    """Raised for malformed command lines (missing or ill-typed flags, unknown commands)."""
