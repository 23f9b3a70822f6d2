"""Exception hierarchy shared by all leafhom modules."""

from __future__ import annotations


class LeafhomError(Exception):
    """Base class for all leafhom errors."""


class ValidationError(LeafhomError):
    """A model or field invariant is violated; the message names it."""


class ShapeError(LeafhomError):
    """Matrix/vector dimensions are inconsistent."""


class ComplexViolationError(LeafhomError):
    """A supposed complex is broken: the image is not inside the kernel."""


class UnsupportedModelError(LeafhomError):
    """The operation is not defined for this model family."""


class WindowError(LeafhomError):
    """The truncation window is too small for the requested computation."""


class InsufficientTruncationError(LeafhomError):
    """A symbol operation reached below its validity watermark."""


class SpecParseError(LeafhomError):
    """A model specification document could not be parsed."""
