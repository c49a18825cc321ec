"""Exception types raised across the package.

Everything derives from NvFuseError so callers can catch data problems with a
single except clause; the CLI maps these to exit code 1.
"""

from __future__ import annotations


class NvFuseError(Exception):
    """Base class for all errors raised by this package."""


class UnknownTagError(NvFuseError, ValueError):
    """A bracketed tag names no known nonverbal-vocalization category."""

    def __init__(self, tag: str):
        super().__init__(f"unknown nonverbal tag: [{tag}]")
        self.tag = tag


class TranscriptSyntaxError(NvFuseError, ValueError):
    """Unbalanced bracket in transcript text; carries the UTF-8 byte offset."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} at byte offset {byte_offset}")
        self.byte_offset = byte_offset


class IllegalSymbolError(NvFuseError, ValueError):
    """A gap (or otherwise out-of-place) symbol where one is not allowed."""


class GranularityMismatchError(NvFuseError, ValueError):
    """Word-level and character-level sequences were mixed in one operation."""


class NoHypothesesError(NvFuseError, ValueError):
    """Fusion was invoked with an empty hypothesis list."""


class InvalidThresholdError(NvFuseError, ValueError):
    """A vote threshold is not satisfiable for the given number of voters."""


class TimingMismatchError(NvFuseError, ValueError):
    """Transcript words disagree with forced-alignment word timings."""

    def __init__(self, index: int, expected: str | None, actual: str | None):
        super().__init__(
            f"transcript/timing word mismatch at index {index}: "
            f"timing has {expected!r}, transcript has {actual!r}"
        )
        self.index = index


class InfeasibleSpecError(NvFuseError, ValueError):
    """Split sizes cannot be met under the eligibility constraints."""


class EmptyReferenceError(NvFuseError, ValueError):
    """WER requested against an empty reference word sequence."""


class InvalidInputError(NvFuseError, ValueError):
    """An argument is outside its documented domain."""


class PairingError(NvFuseError, ValueError):
    """Reference and hypothesis streams do not cover the same utterance ids."""


class DataFormatError(NvFuseError, ValueError):
    """A serialized record (JSONL line) could not be parsed; carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
