"""Shared exception types with CLI exit-code mapping."""


class GalekitError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ContractViolation(GalekitError):
    """An input breaks a documented invariant (bad kind mix, oracle misbehavior, ...)."""

    exit_code = 2

    def __init__(self, message: str, *, witness: str | None = None):
        super().__init__(message)
        self.witness = witness


class ConfigError(GalekitError):
    """Malformed or unusable configuration."""

    exit_code = 65


class RangeViolation(ConfigError):
    """A rule value falls outside its declared range."""


class CapExceeded(GalekitError):
    """A bounded search ran out of budget; carries whatever was achieved."""

    exit_code = 3

    def __init__(self, message: str, *, achieved=None, partial=None):
        super().__init__(message)
        self.achieved = achieved
        self.partial = partial


class UsageError(GalekitError):
    """Bad command line."""

    exit_code = 64
