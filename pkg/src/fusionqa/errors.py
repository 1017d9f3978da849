"""Shared exception types.

Every failure mode raised by this package is one of the classes below, so
callers can distinguish bad shapes from bad values from bad usage without
string-matching messages.
"""


class FusionQAError(Exception):
    """Base class for all package errors."""


class DimensionError(FusionQAError, ValueError):
    """Operand shapes are incompatible for the requested operation."""


class DomainError(FusionQAError, ValueError):
    """A numeric argument lies outside the operation's domain."""


class ContractError(FusionQAError, ValueError):
    """An API precondition was violated by the caller."""


class InputError(FusionQAError, ValueError):
    """User-supplied data (tokens, turn indices, corpora) is invalid."""


class ParseError(FusionQAError, ValueError):
    """A file does not conform to its documented schema."""


class ConfigError(FusionQAError, ValueError):
    """A configuration value is inconsistent or out of range."""
