"""Exception types shared across the package."""


class QdGripError(Exception):
    """Base class for errors raised by qdgrip."""


class MeshLoadError(QdGripError):
    """A mesh file could not be parsed into a usable triangle mesh."""


class ConfigError(QdGripError):
    """A run configuration is malformed or inconsistent."""


class SchemaError(QdGripError):
    """An output file carries a missing or unsupported schema version."""
