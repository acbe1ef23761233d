"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand shapes are inconsistent with each other."""


class FormatError(ValueError):
    """A data file violates its documented format."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingIdError(LookupError):
    """A sentence id is absent from a vector store."""


class UnknownSenseError(LookupError):
    """A sense label is not part of the inventory."""


class IdFormatError(ValueError):
    """A document id does not follow the expected wsj_SSNN pattern."""


class EmptyCompositionError(ValueError):
    """No n-gram of the sequence was found in the table."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""


class NumericError(ArithmeticError):
    """A numeric routine hit non-finite values."""


class InventoryMismatchError(ValueError):
    """Checkpoint sense inventory is incompatible with the corpus."""


class ConfigError(ValueError):
    """An experiment configuration is invalid or incomplete."""
