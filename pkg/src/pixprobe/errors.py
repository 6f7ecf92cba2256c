"""Exception types raised across the package."""


class PixprobeError(Exception):
    """Base class for all domain errors."""


class DecodeError(PixprobeError):
    """Malformed image stream. ``offset`` is the byte where parsing broke."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedFormatError(PixprobeError):
    """Valid stream but an unsupported format or bit depth."""


class ChannelCountError(PixprobeError):
    """Operation received an image with the wrong number of channels."""


class DimsMismatchError(PixprobeError):
    """Image/mask or tensor dimensions disagree."""


class AllUnknownError(PixprobeError):
    """Mask covers the whole image; there is no known boundary to grow from."""


class NoSourceError(PixprobeError):
    """Hole leaves no fully-known source patch to copy from."""


class ShapeError(PixprobeError):
    """Tensor shapes incompatible with the requested operator."""


class GraphError(PixprobeError):
    """Model graph failed validation or shape inference."""


class CamIncompatibleError(GraphError):
    """Graph does not end in conv (opt. relu) -> global-avg-pool -> softmax."""


class WeightError(PixprobeError):
    """Weight blob missing or inconsistent with its declared shape."""


class ClassRangeError(PixprobeError):
    """Class index outside the model's class count."""


class UnknownSessionError(PixprobeError):
    """No session with the given id (or it expired)."""
