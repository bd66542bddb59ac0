"""Exception hierarchy shared by the library and the command line."""


class EESLifeError(Exception):
    """Base class for all package errors."""


class DomainError(EESLifeError, ValueError):
    """An argument lies outside the domain of an operation."""


class InfeasibleError(EESLifeError):
    """A dispatch problem has no feasible schedule."""


class PriceLoadError(EESLifeError):
    """A price file could not be read or failed validation."""


class ConfigError(EESLifeError):
    """A run configuration is malformed or inconsistent."""
