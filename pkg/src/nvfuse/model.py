"""Core data model: symbol alphabet, transcripts, taxonomies, and records.

A transcript is an ordered sequence of atomic symbols. A symbol is a word, a
single character, or a bracketed nonverbal tag such as ``[laugh]``; gap
symbols exist only inside aligned sequences and never in a transcript.
All types are immutable values and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    IllegalSymbolError,
    InvalidInputError,
    TranscriptSyntaxError,
    UnknownTagError,
)


class NvType(str, Enum):
    """The ten nonverbal-vocalization categories, in descending-frequency order."""

    BREATH = "breath"
    LAUGH = "laugh"
    SNIFF = "sniff"
    COUGH = "cough"
    THROAT = "throat"
    SIGH = "sigh"
    GROAN = "groan"
    SNEEZE = "sneeze"
    SNORE = "snore"
    GRUNT = "grunt"


class Emotion(str, Enum):
    """Eight votable emotion categories plus the distinguished unassigned state.

    ``UNASSIGNED`` marks lack of annotator agreement; it is not the same label
    as ``OTHER``.
    """

    ANGRY = "angry"
    DISGUSTED = "disgusted"
    FEARFUL = "fearful"
    HAPPY = "happy"
    NEUTRAL = "neutral"
    SAD = "sad"
    SURPRISED = "surprised"
    OTHER = "other"
    UNASSIGNED = "unassigned"


VOTABLE_EMOTIONS = tuple(e for e in Emotion if e is not Emotion.UNASSIGNED)


class Granularity(str, Enum):
    WORD = "word"
    CHAR = "char"


class Source(str, Enum):
    VOXCELEB = "voxceleb"
    EXPRESSO = "expresso"


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNKNOWN = "unknown"


class SymbolKind(str, Enum):
    WORD = "word"
    CHAR = "char"
    NV_TAG = "nv"
    GAP = "gap"


_BRACKETS = "[]"


@dataclass(frozen=True, slots=True)
class Symbol:
    """One atomic alignment unit. Equality is exact and case-sensitive.

    ``value`` holds the word text, the single character, the NvType member,
    or ``""`` for a gap. A nonverbal tag is atomic at every granularity and
    never compares equal to a word with the same spelling.
    """

    kind: SymbolKind
    value: str | NvType

    def __post_init__(self):
        if self.kind is SymbolKind.WORD:
            v = self.value
            if not isinstance(v, str) or not v:
                raise InvalidInputError("word symbol needs non-empty text")
            if any(c.isspace() for c in v) or any(c in _BRACKETS for c in v):
                raise InvalidInputError(f"word symbol may not contain whitespace or brackets: {v!r}")
        elif self.kind is SymbolKind.CHAR:
            v = self.value
            if not isinstance(v, str) or len(v) != 1 or v in _BRACKETS:
                raise InvalidInputError(f"char symbol must be a single non-bracket character: {v!r}")
        elif self.kind is SymbolKind.NV_TAG:
            if not isinstance(self.value, NvType):
                raise InvalidInputError(f"nv symbol needs an NvType, got {self.value!r}")
        else:  # GAP
            if self.value != "":
                raise InvalidInputError("gap symbol carries no value")

    @staticmethod
    def word(text: str) -> "Symbol":
        return Symbol(SymbolKind.WORD, text)

    @staticmethod
    def char(c: str) -> "Symbol":
        return Symbol(SymbolKind.CHAR, c)

    @staticmethod
    def nv(tag: NvType) -> "Symbol":
        return Symbol(SymbolKind.NV_TAG, tag)

    @property
    def is_gap(self) -> bool:
        return self.kind is SymbolKind.GAP

    @property
    def is_nv(self) -> bool:
        return self.kind is SymbolKind.NV_TAG

    def token(self) -> str:
        """Render as transcript text; gaps render as "-" (debug display only)."""
        if self.kind is SymbolKind.NV_TAG:
            return f"[{self.value.value}]"
        if self.kind is SymbolKind.GAP:
            return "-"
        return self.value


GAP = Symbol(SymbolKind.GAP, "")


@dataclass(frozen=True, slots=True)
class Transcript:
    """Gap-free symbol sequence together with the granularity it was built at."""

    symbols: tuple[Symbol, ...]
    granularity: Granularity = Granularity.WORD

    def __post_init__(self):
        for sym in self.symbols:
            if sym.is_gap:
                raise IllegalSymbolError("transcript may not contain gap symbols")

    def __len__(self) -> int:
        return len(self.symbols)

    def nv_counts(self) -> dict[NvType, int]:
        """Occurrence count per nonverbal type (a repeated tag counts each time)."""
        counts: dict[NvType, int] = {}
        for sym in self.symbols:
            if sym.is_nv:
                counts[sym.value] = counts.get(sym.value, 0) + 1
        return counts

    @property
    def nv_types(self) -> frozenset[NvType]:
        return frozenset(sym.value for sym in self.symbols if sym.is_nv)

    def words(self) -> list[str]:
        return [sym.value for sym in self.symbols if sym.kind is SymbolKind.WORD]


_TAG_BY_NAME = {t.value: t for t in NvType}


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _tokenize(text: str):
    """Split text into ('tag', NvType) and ('text', str) pieces.

    Raises TranscriptSyntaxError for stray or unclosed brackets and
    UnknownTagError for a bracketed name outside the closed tag set.
    """
    pieces = []
    i = 0
    n = len(text)
    start = 0
    while i < n:
        c = text[i]
        if c == "]":
            raise TranscriptSyntaxError("unmatched ']'", _byte_offset(text, i))
        if c == "[":
            if start < i:
                pieces.append(("text", text[start:i]))
            close = text.find("]", i + 1)
            inner_open = text.find("[", i + 1)
            if inner_open != -1 and (close == -1 or inner_open < close):
                raise TranscriptSyntaxError("nested '['", _byte_offset(text, inner_open))
            if close == -1:
                raise TranscriptSyntaxError("unclosed '['", _byte_offset(text, i))
            name = text[i + 1 : close]
            tag = _TAG_BY_NAME.get(name)
            if tag is None:
                raise UnknownTagError(name)
            pieces.append(("tag", tag))
            i = close + 1
            start = i
        else:
            i += 1
    if start < n:
        pieces.append(("text", text[start:]))
    return pieces


def parse_transcript(text: str, granularity: Granularity = Granularity.WORD) -> Transcript:
    """Parse bracketed-tag transcript text into a Transcript.

    Word granularity splits plain text on whitespace; char granularity emits
    one symbol per character with inter-token whitespace collapsed to a single
    space character (leading and trailing whitespace dropped), so word
    boundaries survive alignment and voting.
    """
    granularity = Granularity(granularity)
    symbols: list[Symbol] = []
    if granularity is Granularity.WORD:
        for kind, piece in _tokenize(text):
            if kind == "tag":
                symbols.append(Symbol.nv(piece))
            else:
                symbols.extend(Symbol.word(w) for w in piece.split())
    else:
        pending_space = False
        for kind, piece in _tokenize(text):
            if kind == "tag":
                if pending_space and symbols:
                    symbols.append(Symbol.char(" "))
                pending_space = False
                symbols.append(Symbol.nv(piece))
            else:
                for ch in piece:
                    if ch.isspace():
                        pending_space = True
                        continue
                    if pending_space and symbols:
                        symbols.append(Symbol.char(" "))
                    pending_space = False
                    symbols.append(Symbol.char(ch))
    return Transcript(tuple(symbols), granularity)


def render_symbols(symbols, granularity: Granularity = Granularity.WORD) -> str:
    """Render a gap-free symbol sequence as transcript text."""
    for sym in symbols:
        if sym.is_gap:
            raise IllegalSymbolError("cannot serialize a gap symbol")
    sep = " " if Granularity(granularity) is Granularity.WORD else ""
    return sep.join(sym.token() for sym in symbols)


def serialize_transcript(t: Transcript) -> str:
    """Inverse of parse_transcript up to whitespace normalization."""
    return render_symbols(t.symbols, t.granularity)


@dataclass(frozen=True, slots=True)
class DetectionEvent:
    """One detected nonverbal occurrence with timing and confidence."""

    nv_type: NvType
    start_s: float
    end_s: float
    confidence: float

    def __post_init__(self):
        if self.start_s < 0 or not self.start_s < self.end_s:
            raise InvalidInputError(
                f"detection needs 0 <= start < end, got [{self.start_s}, {self.end_s}]"
            )
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidInputError(f"confidence outside [0, 1]: {self.confidence}")

    @property
    def midpoint_s(self) -> float:
        return (self.start_s + self.end_s) / 2.0


@dataclass(frozen=True, slots=True)
class WordTiming:
    """Forced-alignment start/end for one transcript word."""

    word: str
    start_s: float
    end_s: float

    def __post_init__(self):
        if self.start_s < 0 or not self.start_s < self.end_s:
            raise InvalidInputError(
                f"word timing needs 0 <= start < end, got [{self.start_s}, {self.end_s}]"
            )


@dataclass(frozen=True, slots=True)
class DiscardFlags:
    """Per-submission rejection flags raised during human review."""

    non_english: bool = False
    multi_speaker: bool = False
    background_nv: bool = False

    FLAG_NAMES = ("non_english", "multi_speaker", "background_nv")

    def raised(self) -> tuple[str, ...]:
        return tuple(name for name in self.FLAG_NAMES if getattr(self, name))

    def any(self) -> bool:
        return self.non_english or self.multi_speaker or self.background_nv


@dataclass(frozen=True, slots=True)
class AnnotatorSubmission:
    """One annotator's refined transcript, emotion label, and discard flags.

    A flagged submission still carries its (possibly empty) transcript; the
    flags feed rejection voting downstream.
    """

    transcript: Transcript
    emotion: Emotion = Emotion.UNASSIGNED
    flags: DiscardFlags = field(default_factory=DiscardFlags)


@dataclass(frozen=True, slots=True)
class UtteranceRecord:
    """One audio clip's metadata row in a dataset manifest.

    duration_s of 0.0 means "not yet known" (e.g. a freshly fused record
    before metadata enrichment); negative durations are rejected.
    """

    utterance_id: str
    audio_path: str
    speaker_id: str
    source: Source
    duration_s: float
    gender: Gender
    transcript: Transcript
    emotion: Emotion = Emotion.UNASSIGNED

    def __post_init__(self):
        if not self.utterance_id:
            raise InvalidInputError("utterance_id must be non-empty")
        if self.duration_s < 0:
            raise InvalidInputError(f"duration_s must be >= 0, got {self.duration_s}")

    @property
    def nv_types(self) -> frozenset[NvType]:
        """Exactly the set of nonverbal types occurring in the transcript."""
        return self.transcript.nv_types


SPLIT_NAMES = ("train", "dev", "test")


@dataclass(frozen=True)
class DatasetManifest:
    """A collection of utterance records plus an optional split assignment."""

    records: tuple[UtteranceRecord, ...]
    split_assignment: dict[str, str] | None = None

    def __post_init__(self):
        ids = [r.utterance_id for r in self.records]
        if len(set(ids)) != len(ids):
            seen, dup = set(), None
            for i in ids:
                if i in seen:
                    dup = i
                    break
                seen.add(i)
            raise InvalidInputError(f"duplicate utterance_id in manifest: {dup!r}")
        if self.split_assignment is not None:
            if set(self.split_assignment) != set(ids):
                raise InvalidInputError("split assignment must cover every record exactly once")
            bad = set(self.split_assignment.values()) - set(SPLIT_NAMES)
            if bad:
                raise InvalidInputError(f"unknown split name(s): {sorted(bad)}")

    def __len__(self) -> int:
        return len(self.records)

    def split_of(self, utterance_id: str) -> str | None:
        if self.split_assignment is None:
            return None
        return self.split_assignment[utterance_id]
