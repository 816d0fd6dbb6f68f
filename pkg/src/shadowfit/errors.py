"""Exception types raised across the package."""


class ShadowfitError(Exception):
    """Base class for package errors."""


class DomainError(ShadowfitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DataError(ShadowfitError, ValueError):
    """A count table or input file is malformed or unusable."""


class ConfigError(ShadowfitError, ValueError):
    """A run configuration is missing a key or has an invalid value."""
