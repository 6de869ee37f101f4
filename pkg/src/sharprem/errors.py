"""Exception types shared across the package."""


class SharpremError(Exception):
    """Base class for package errors."""


class DomainError(SharpremError):
    """Invalid domain construction or mismatched domains."""


class CollarError(SharpremError):
    """Compact-support collar too thin for the requested operator depth."""


class PositivityError(SharpremError):
    """A function required to be strictly positive is not."""


class ConvergenceError(SharpremError):
    """An iterative solver failed to reach its tolerance."""


class ConfigError(SharpremError):
    """Invalid experiment configuration (CLI exit code 2)."""
