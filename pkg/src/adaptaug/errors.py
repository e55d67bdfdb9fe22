"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the domain an operation is defined on."""


class ShapeError(ValueError):
    """Array dimensions are inconsistent with one another."""


class FormatError(ValueError):
    """An input file does not comply with its documented format."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values and was aborted."""


class ConfigError(ValueError):
    """A run configuration is missing a key or holds an invalid value."""
