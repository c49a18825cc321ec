"""Insert detected nonverbal tags into a plain transcription.

Detector events carry timestamps; forced-alignment timings carry per-word
start/end. Each surviving event's tag goes to the inter-word boundary nearest
the event midpoint, producing the weak transcription that seeds fusion. Tags
never interrupt a word.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidInputError, TimingMismatchError
from .model import DetectionEvent, Symbol, SymbolKind, Transcript, WordTiming


@dataclass(frozen=True)
class PlacementConfig:
    """Detection confidence cutoff (inclusive) and the boundary policy."""

    confidence_threshold: float = 0.1
    overlap_policy: str = "nearest_boundary"

    def __post_init__(self):
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise InvalidInputError(
                f"confidence_threshold outside [0, 1]: {self.confidence_threshold}"
            )
        if self.overlap_policy != "nearest_boundary":
            raise InvalidInputError(f"unsupported overlap policy: {self.overlap_policy!r}")


def filter_events(
    events: Sequence[DetectionEvent],
    cfg: PlacementConfig = PlacementConfig(),
) -> list[DetectionEvent]:
    """Keep events at or above the confidence threshold, sorted by start time."""
    return sorted(
        (e for e in events if e.confidence >= cfg.confidence_threshold),
        key=lambda e: e.start_s,
    )


def _boundaries(words: Sequence[WordTiming]) -> list[float]:
    """Times of the n+1 insertion points: before the first word, between
    consecutive words (midpoint of the surrounding gap), after the last."""
    if not words:
        return [0.0]
    times = [words[0].start_s]
    for prev, nxt in zip(words, words[1:]):
        times.append((prev.end_s + nxt.start_s) / 2.0)
    times.append(words[-1].end_s)
    return times


def place_tags(
    words: Sequence[WordTiming],
    transcript: Transcript,
    events: Sequence[DetectionEvent],
) -> Transcript:
    """Insert each event's tag at the word boundary nearest its midpoint.

    Events should already be confidence-filtered. Several events mapping to
    one boundary keep start-time order; an equidistant midpoint breaks toward
    the earlier boundary. Stripping the inserted tags recovers the input.
    """
    for prev, nxt in zip(words, words[1:]):
        if nxt.start_s < prev.end_s:
            raise InvalidInputError(
                f"word timings must be sorted and non-overlapping: "
                f"{prev.word!r} [{prev.start_s}, {prev.end_s}] then "
                f"{nxt.word!r} [{nxt.start_s}, {nxt.end_s}]"
            )
    transcript_words = transcript.words()
    timing_words = [w.word for w in words]
    if transcript_words != timing_words:
        limit = min(len(transcript_words), len(timing_words))
        idx = next(
            (k for k in range(limit) if transcript_words[k] != timing_words[k]),
            limit,
        )
        raise TimingMismatchError(
            idx,
            timing_words[idx] if idx < len(timing_words) else None,
            transcript_words[idx] if idx < len(transcript_words) else None,
        )

    times = _boundaries(words)
    buckets: dict[int, list[Symbol]] = {}
    for event in sorted(events, key=lambda e: e.start_s):
        mid = event.midpoint_s
        best = min(range(len(times)), key=lambda k: (abs(times[k] - mid), k))
        buckets.setdefault(best, []).append(Symbol.nv(event.nv_type))

    out: list[Symbol] = []
    word_index = 0
    for sym in transcript.symbols:
        if sym.kind is SymbolKind.WORD:
            out.extend(buckets.get(word_index, ()))
            word_index += 1
        out.append(sym)
    out.extend(buckets.get(word_index, ()))
    return Transcript(tuple(out), transcript.granularity)


def strip_nv_tags(transcript: Transcript) -> Transcript:
    """Remove all nonverbal tags, leaving the spoken symbols."""
    return Transcript(
        tuple(sym for sym in transcript.symbols if not sym.is_nv),
        transcript.granularity,
    )
