"""Exception hierarchy.

The CLI maps each class to an exit status through ``exit_code``.
"""


class BiasdensError(Exception):
    exit_code = 1


class ConfigurationError(BiasdensError, ValueError):
    """Invalid model, bias or experiment configuration."""

    exit_code = 3


class ValidationError(ConfigurationError):
    """Input data or a value fails a declared constraint."""


class DomainError(BiasdensError, ValueError):
    """A point lies outside the domain of a basis function or bias."""

    exit_code = 3


class ArgumentError(BiasdensError, ValueError):
    """Bad argument to an estimator operation (e.g. an empty sample)."""

    exit_code = 3


class NumericError(BiasdensError, ArithmeticError):
    """Non-finite values or quadrature that fails its convergence check."""

    exit_code = 4


class UsageError(BiasdensError, ValueError):
    """Malformed command-line input."""

    exit_code = 2
