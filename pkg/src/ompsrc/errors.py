"""Exception hierarchy shared by every ompsrc module."""


class OmpSrcError(Exception):
    """Base class for all errors raised by ompsrc."""


class DimensionError(OmpSrcError, ValueError):
    """Operands have non-conformable shapes."""


class InvalidInputError(OmpSrcError, ValueError):
    """An argument violates a documented precondition."""


class EmptyDictionaryError(InvalidInputError):
    """A dictionary has no nonzero column to select from."""


class OracleGuardError(InvalidInputError):
    """Exhaustive search requested beyond its size guard."""


class FilenameError(InvalidInputError):
    """A sample filename does not follow the gender-person-index convention."""

    def __init__(self, name, component, reason):
        self.name = name
        self.component = component
        super().__init__(f"{name!r}: bad {component}: {reason}")


class ImageFormatError(OmpSrcError):
    """An image file could not be decoded."""


class DictionaryFileError(OmpSrcError):
    """Base class for dictionary file decoding problems."""


class DictionaryFormatError(DictionaryFileError):
    """Bad magic bytes or internally inconsistent content."""


class DictionaryVersionError(DictionaryFileError):
    """The file was written by an unsupported format version."""

    def __init__(self, found, supported):
        self.found = found
        self.supported = supported
        super().__init__(f"unsupported dictionary format version {found} (expected {supported})")


class DictionaryTruncatedError(DictionaryFileError):
    """The file ended before all declared content was read."""

    def __init__(self, offset, needed, what):
        self.offset = offset
        self.needed = needed
        super().__init__(f"truncated dictionary file at byte offset {offset}: "
                         f"needed {needed} more bytes for {what}")
