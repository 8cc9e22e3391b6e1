from typing import Optional


class SweepError(Exception):
    """Base class for every error raised by the sweep services."""


# Scalar arithmetic
class OutOfRange(SweepError):
    pass


class ZeroKey(SweepError):
    pass


class ZeroBase(SweepError):
    pass


class IndexOutOfRange(SweepError):
    pass


class NonDivisor(SweepError):
    pass


class RangeOverflow(SweepError):
    pass


# Curve
class InfinityPoint(SweepError):
    pass


# Codecs
class BadChecksum(SweepError):
    pass


class BadAlphabet(SweepError):
    pass


class BadAddress(SweepError):
    pass


class BadProgramLength(SweepError):
    pass


class BadHashLength(SweepError):
    pass


class BadLength(SweepError):
    pass


# Derivation
class InvalidCombination(SweepError):
    pass


# Corpus
class EmptyInput(SweepError):
    pass


class FileUnreadable(SweepError):
    pass


class DiskFull(SweepError):
    pass


class CorpusMissing(SweepError):
    pass


class SourceError(SweepError):
    """Block source failure; carries the failing height and the resume cursor."""

    def __init__(self, message: str, height: int, last_completed: Optional[int] = None):
        super().__init__(f"{message} (height {height})")
        self.height = height
        self.last_completed = last_completed


# Scanner / survey
class ConfigError(SweepError):
    pass


class CheckpointMismatch(SweepError):
    pass


class CatalogTooLarge(SweepError):
    pass
