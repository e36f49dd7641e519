"""Shared exception types.

The CLI maps these onto exit codes: config errors exit 2, numerical guard
aborts exit 3, inconclusive stochastic verdicts exit 4.
"""


class QKineticError(Exception):
    """Base class for package-specific errors."""


class ConfigError(QKineticError):
    """A configuration file or parameter set is invalid."""


class NumericalGuardError(QKineticError):
    """A numerical safety guard tripped (blow-up, unresolved scale, ...)."""


class InconclusiveError(QKineticError):
    """A stochastic check could not distinguish pass from fail."""


class UnsupportedOperationError(QKineticError):
    """The requested operation is outside the supported envelope."""
