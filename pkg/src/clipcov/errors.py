"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: InputError means the caller's data or
files are unusable (exit 2); everything else raised here is an
estimation-stage failure (exit 1).
"""


class ClipcovError(Exception):
    """Base class for all package-specific errors."""


class InputError(ClipcovError, ValueError):
    """Malformed, inconsistent, or non-finite data supplied by the caller."""


class ConfigError(ClipcovError, ValueError):
    """Well-formed data combined with unusable parameters."""


class DomainError(ClipcovError, ValueError):
    """Request that is mathematically undefined for the given input."""
