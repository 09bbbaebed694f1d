"""Exception types shared across the toolkit."""

from __future__ import annotations


class SpeckleTkError(Exception):
    """Base class for all toolkit errors."""


class StackFormatError(SpeckleTkError):
    """File is not a recognized stack/image format (bad magic, wrong pixel type)."""


class InvalidHeaderError(StackFormatError):
    """Header parsed but declares impossible geometry (zero dims, bad depth)."""


class CorruptStackError(StackFormatError):
    """Header is valid but the payload is truncated or inconsistent."""


class DimensionMismatchError(SpeckleTkError, ValueError):
    """Inputs that must share dimensions do not."""


class InsufficientFramesError(SpeckleTkError, ValueError):
    """Stack has too few frames for the requested descriptor."""


class CompositionError(DimensionMismatchError):
    """RGB channel sources cannot be fused."""
