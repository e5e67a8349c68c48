"""Exception hierarchy shared by every afmap module."""


class AfmError(ValueError):
    """Base class for all validation failures raised by afmap."""


class InvalidSegmentError(AfmError):
    """A segment has zero length or non-finite coordinates."""


class EmptyMapError(AfmError):
    """An operation needs at least one segment but got none."""


class LatticeError(AfmError):
    """Lattice dimensions are invalid or two inputs disagree on them."""


class StateError(AfmError):
    """An attraction field map is in the wrong transform state."""


class DomainError(AfmError):
    """A scalar argument lies outside its legal range."""


class ConfigError(AfmError):
    """A generator or estimator configuration cannot be satisfied."""


class FormatError(AfmError):
    """A file does not follow the expected on-disk layout.

    ``offset`` is the byte offset (binary files) or the segment index
    (JSON files) at which the problem was detected, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset
