"""Exception taxonomy shared across the package and the CLI."""

__all__ = ["HeisencorrError", "ConfigError", "NumericalError", "MissingArtifactError"]


class HeisencorrError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(HeisencorrError):
    """Malformed or inconsistent run configuration."""


class NumericalError(HeisencorrError):
    """Propagation or post-processing produced untrustworthy numbers."""


class MissingArtifactError(HeisencorrError):
    """A pipeline stage needs an output another stage has not produced."""
