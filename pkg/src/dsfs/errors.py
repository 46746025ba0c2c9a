"""Exception hierarchy shared across the pipeline."""


class DsfsError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(DsfsError):
    """Invalid configuration value or malformed config file."""


class DataError(DsfsError):
    """Malformed or inconsistent input data (images, manifests, artifacts)."""


class DimensionMismatchError(DataError):
    """Two rasters or vectors that must agree in shape do not."""


class ConvergenceError(DsfsError):
    """An iterative solver failed to produce a usable result."""
