"""Exception types shared across the package."""


class CascadeForestError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(CascadeForestError, ValueError):
    """A feature/label file is malformed or violates a dataset invariant.

    Messages include the offending row number whenever one exists.
    """


class ModelFormatError(CascadeForestError, ValueError):
    """A model file has a bad magic, version, checksum, or is truncated."""
