"""Line-delimited JSON record schemas shared by the pipeline stages.

One JSON object per line, UTF-8. Readers are streaming generators (constant
memory over arbitrarily large corpora) and report malformed lines with their
line number. Writers emit keys in a fixed order so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .errors import DataFormatError, NvFuseError
from .model import (
    DetectionEvent,
    DiscardFlags,
    Emotion,
    Gender,
    Granularity,
    NvType,
    Source,
    UtteranceRecord,
    WordTiming,
    parse_transcript,
    serialize_transcript,
)

# Optional manifest metadata keys that may ride along on hypotheses lines and
# pass through to the fused manifest.
PASSTHROUGH_KEYS = ("audio_path", "speaker_id", "source", "duration_s", "gender")


def iter_jsonl(fp: IO[str]) -> Iterator[tuple[int, dict]]:
    """Yield (line_no, object) for each non-blank line; line numbers are 1-based."""
    for line_no, line in enumerate(fp, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise DataFormatError(line_no, "expected a JSON object")
        yield line_no, obj


def write_jsonl(fp: IO[str], objects: Iterable[dict]) -> None:
    for obj in objects:
        fp.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _require(obj: dict, key: str, line_no: int):
    if key not in obj:
        raise DataFormatError(line_no, f"missing required field {key!r}")
    return obj[key]


# --- detections ---------------------------------------------------------

def parse_detections_line(obj: dict, line_no: int = 0) -> tuple[str, list[DetectionEvent]]:
    utt = _require(obj, "utterance_id", line_no)
    events = []
    for k, ev in enumerate(_require(obj, "events", line_no)):
        try:
            events.append(
                DetectionEvent(
                    nv_type=NvType(ev["type"]),
                    start_s=float(ev["start_s"]),
                    end_s=float(ev["end_s"]),
                    confidence=float(ev["confidence"]),
                )
            )
        except (KeyError, ValueError, NvFuseError) as exc:
            raise DataFormatError(line_no, f"bad detection event #{k}: {exc}") from exc
    return utt, events


def detections_to_obj(utterance_id: str, events: Iterable[DetectionEvent]) -> dict:
    return {
        "utterance_id": utterance_id,
        "events": [
            {
                "type": e.nv_type.value,
                "start_s": e.start_s,
                "end_s": e.end_s,
                "confidence": e.confidence,
            }
            for e in events
        ],
    }


# --- word timings -------------------------------------------------------

def parse_timings_line(obj: dict, line_no: int = 0) -> tuple[str, list[WordTiming]]:
    utt = _require(obj, "utterance_id", line_no)
    words = []
    for k, w in enumerate(_require(obj, "words", line_no)):
        try:
            words.append(
                WordTiming(word=str(w["word"]), start_s=float(w["start_s"]), end_s=float(w["end_s"]))
            )
        except (KeyError, ValueError, NvFuseError) as exc:
            raise DataFormatError(line_no, f"bad word timing #{k}: {exc}") from exc
    return utt, words


def timings_to_obj(utterance_id: str, words: Iterable[WordTiming]) -> dict:
    return {
        "utterance_id": utterance_id,
        "words": [{"word": w.word, "start_s": w.start_s, "end_s": w.end_s} for w in words],
    }


# --- annotator hypotheses -----------------------------------------------

@dataclass(frozen=True)
class RawSubmission:
    """One annotator's line-level submission before transcript parsing."""

    transcript: str
    emotion: Emotion
    flags: DiscardFlags


@dataclass(frozen=True)
class UtteranceHypotheses:
    """One utterance's weak transcription plus all annotator submissions.

    ``meta`` keeps any optional manifest metadata found on the line so the
    fused record can carry it forward.
    """

    utterance_id: str
    weak_transcript: str
    submissions: tuple[RawSubmission, ...]
    meta: dict = field(default_factory=dict)


def parse_hypotheses_line(obj: dict, line_no: int = 0) -> UtteranceHypotheses:
    utt = _require(obj, "utterance_id", line_no)
    weak = _require(obj, "weak_transcript", line_no)
    subs = []
    for k, sub in enumerate(_require(obj, "submissions", line_no)):
        try:
            flags_obj = sub.get("flags", {})
            subs.append(
                RawSubmission(
                    transcript=str(sub["transcript"]),
                    emotion=Emotion(sub["emotion"]) if sub.get("emotion") else Emotion.UNASSIGNED,
                    flags=DiscardFlags(
                        non_english=bool(flags_obj.get("non_english", False)),
                        multi_speaker=bool(flags_obj.get("multi_speaker", False)),
                        background_nv=bool(flags_obj.get("background_nv", False)),
                    ),
                )
            )
        except (KeyError, ValueError) as exc:
            raise DataFormatError(line_no, f"bad submission #{k}: {exc}") from exc
    meta = {k: obj[k] for k in PASSTHROUGH_KEYS if k in obj}
    return UtteranceHypotheses(utt, str(weak), tuple(subs), meta)


# --- plain transcripts (input to tag placement) --------------------------

def parse_transcripts_line(obj: dict, line_no: int = 0) -> tuple[str, str]:
    return _require(obj, "utterance_id", line_no), str(_require(obj, "transcript", line_no))


# --- manifest -----------------------------------------------------------

def parse_manifest_line(obj: dict, line_no: int = 0) -> tuple[UtteranceRecord, str | None]:
    try:
        emotion_raw = obj.get("emotion")
        record = UtteranceRecord(
            utterance_id=str(_require(obj, "utterance_id", line_no)),
            audio_path=str(obj.get("audio_path", "")),
            speaker_id=str(_require(obj, "speaker_id", line_no)),
            source=Source(_require(obj, "source", line_no)),
            duration_s=float(obj.get("duration_s", 0.0)),
            gender=Gender(obj.get("gender", "unknown")),
            transcript=parse_transcript(str(obj.get("transcript", "")), Granularity.WORD),
            emotion=Emotion(emotion_raw) if emotion_raw else Emotion.UNASSIGNED,
        )
    except (ValueError, NvFuseError) as exc:
        raise DataFormatError(line_no, f"bad manifest record: {exc}") from exc
    split = obj.get("split")
    if split is not None:
        split = str(split)
    return record, split


def manifest_record_to_obj(record: UtteranceRecord, split: str | None = None) -> dict:
    emotion = record.emotion
    return {
        "utterance_id": record.utterance_id,
        "audio_path": record.audio_path,
        "speaker_id": record.speaker_id,
        "source": record.source.value,
        "duration_s": record.duration_s,
        "gender": record.gender.value,
        "transcript": serialize_transcript(record.transcript),
        "emotion": None if emotion is Emotion.UNASSIGNED else emotion.value,
        "split": split,
    }


def load_manifest(path) -> tuple[list[UtteranceRecord], dict[str, str] | None]:
    """Read a whole manifest file; returns records and the split map (or None
    when no line carries a split)."""
    records: list[UtteranceRecord] = []
    splits: dict[str, str] = {}
    with open(path, encoding="utf-8") as fp:
        for line_no, obj in iter_jsonl(fp):
            record, split = parse_manifest_line(obj, line_no)
            records.append(record)
            if split is not None:
                splits[record.utterance_id] = split
    return records, (splits or None)
