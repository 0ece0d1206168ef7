"""Exception types raised by the pipeline.

Every malformed input maps to one of these; callers can catch DdtError to
handle any pipeline failure uniformly.
"""


class DdtError(Exception):
    """Base class for all errors raised by this package."""


# --- descriptor file parsing ---

class BadMagic(DdtError):
    pass


class TruncatedFile(DdtError):
    pass


class NonFiniteValue(DdtError):
    pass


class DimOverflow(DdtError):
    pass


class IoFailure(DdtError):
    pass


# --- manifest loading ---

class SchemaError(DdtError):
    pass


class DuplicateId(DdtError):
    pass


class MissingLayer(DdtError):
    def __init__(self, layer, detail=""):
        self.layer = layer
        super().__init__(f"missing layer {layer!r}" + (f": {detail}" if detail else ""))


class BoxOutOfBounds(DdtError):
    pass


class DescriptorFileError(DdtError):
    """A descriptor file referenced by the manifest is missing or invalid."""

    def __init__(self, image_id, cause):
        self.image_id = image_id
        self.cause = cause
        super().__init__(f"descriptor file for image {image_id!r}: {cause}")


# --- statistics ---

class DimMismatch(DdtError):
    pass


class EmptyAccumulator(DdtError):
    pass


class DegenerateCovariance(DdtError):
    pass


class ComponentOutOfRange(DdtError):
    pass


# --- evaluation / export ---

class UnknownImageId(DdtError):
    pass


class MissingNoiseLabels(DdtError):
    pass


class DegenerateLabels(DdtError):
    pass


class NoBoxForImage(DdtError):
    pass
