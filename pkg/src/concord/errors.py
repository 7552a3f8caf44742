"""Exception hierarchy shared by every module of the package."""


class ConcordError(Exception):
    """Base class for all errors raised by concord."""


class InputError(ConcordError, ValueError):
    """Malformed, non-finite or dimensionally inconsistent input."""


class NotAProjectionError(InputError):
    """A field fibre failed the Hermitian/idempotent test."""

    def __init__(self, message, index=None, margin=None):
        super().__init__(message)
        self.index = index
        self.margin = margin


class UnsupportedError(ConcordError):
    """The operation is not defined for this kind of input."""


class DiagnosticsError(ConcordError):
    """Two independent numerical routes disagreed."""
