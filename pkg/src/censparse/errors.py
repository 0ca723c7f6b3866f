"""Exception types shared across the package."""


class CensparseError(Exception):
    """Base class for all package errors."""


class ValidationError(CensparseError, ValueError):
    """An input violates a documented contract (shape, domain, invariant)."""


class ParseError(CensparseError, ValueError):
    """A file could not be parsed; the message carries the offending row."""


class WitnessUndefinedError(CensparseError, RuntimeError):
    """The dual certificate cannot be constructed (singular restricted Gram)."""


class BoundUndefinedError(CensparseError, RuntimeError):
    """A theoretical bound is undefined for the given model (e.g. gamma <= 0)."""
