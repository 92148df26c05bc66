"""Exceptions shared across more than one module."""


class RagError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(RagError):
    """Vector dimensionality does not match what the operation expects."""


class BackendUnavailableError(RagError):
    """An external embedding or generation endpoint could not be reached."""
