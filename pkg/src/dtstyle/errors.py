"""Exception types shared across the package."""


class DtStyleError(Exception):
    """Base class for all dtstyle-specific errors."""


class ImageError(DtStyleError):
    """Base class for image dec, enc, and resize failures."""


class UnreadableFileError(ImageError):
    """The file could not be read from disk at all."""


class UnsupportedFormatError(ImageError):
    """The file is readable but is not a PNG or JPEG image."""


class CorruptImageError(ImageError):
    """The file claims to be PNG/JPEG but its stream does not decode."""


class WeightFileError(DtStyleError):
    """Base class for portable weight file failures."""


class BadMagicError(WeightFileError):
    """The file does not start with the CNSTW magic."""


class VersionMismatchError(WeightFileError):
    """The CNSTW container version is not one this reader understands."""


class ShapeMismatchError(WeightFileError):
    """A declared layer shape is invalid or inconsistent."""


class ChecksumError(WeightFileError):
    """The trailing CRC-32 does not match the file body."""


class TruncatedFileError(WeightFileError):
    """The file ends before the declared payload is complete."""


class ManifestError(DtStyleError):
    """A run manifest line or value could not be parsed."""
