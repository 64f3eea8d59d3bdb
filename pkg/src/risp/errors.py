"""Exception types shared across the package."""


class RispError(Exception):
    """Base class for all package-specific errors."""


class UnknownTermError(RispError):
    """A queried term is not in the vocabulary."""


class ZeroVectorError(RispError):
    """A vocabulary term has no accumulated context and cannot be compared."""


class FrequencyBandError(RispError):
    """A term falls outside the configured frequency band for disambiguation."""


class IndexFormatError(RispError):
    """An index file has a bad magic number, version, or field value."""


class IndexTruncatedError(IndexFormatError):
    """An index file ends before its declared contents."""


class IndexChecksumError(IndexFormatError):
    """An index file's trailing checksum does not match its contents."""


class LockHeldError(RispError):
    """Another process holds the index write lock."""
