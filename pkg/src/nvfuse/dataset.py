"""Manifest-level operations: discard voting, split generation, statistics.

Splits are sampled at speaker level so no speaker ever straddles two subsets;
the test subset may additionally be restricted to one source corpus and to
speakers with a minimum number of recordings. Statistics count nonverbal tags
by occurrence (a transcript with two breaths contributes two).
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InfeasibleSpecError, InvalidInputError
from .jsonl import UtteranceHypotheses
from .model import (
    DatasetManifest,
    DiscardFlags,
    Emotion,
    Gender,
    NvType,
    Source,
    UtteranceRecord,
)


# --- discard-rule voting --------------------------------------------------

def discard_reasons(
    flags: Sequence[DiscardFlags],
    threshold: int | None = None,
) -> tuple[str, ...]:
    """Flags raised by enough submissions to win the vote (per-flag counting).

    ``threshold`` follows fusion semantics: absolute count, or None for strict
    majority. Flags are voted independently; two different flags with one vote
    each do not combine into a discard.
    """
    n = len(flags)
    need = (n // 2 + 1) if threshold is None else threshold
    winners = []
    for name in DiscardFlags.FLAG_NAMES:
        if sum(1 for f in flags if getattr(f, name)) >= need:
            winners.append(name)
    return tuple(winners)


def apply_discard_rules(
    utterances: Iterable[UtteranceHypotheses],
    threshold: int | None = None,
) -> tuple[list[UtteranceHypotheses], list[tuple[UtteranceHypotheses, tuple[str, ...]]]]:
    """Partition hypothesis records into kept and discarded-with-reason."""
    kept: list[UtteranceHypotheses] = []
    discarded: list[tuple[UtteranceHypotheses, tuple[str, ...]]] = []
    for utt in utterances:
        reasons = discard_reasons([s.flags for s in utt.submissions], threshold)
        if reasons:
            discarded.append((utt, reasons))
        else:
            kept.append(utt)
    return kept, discarded


# --- split generation ------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    """Target sizes and eligibility constraints for train/dev/test splitting."""

    test_size: int = 359
    dev_size: int = 46
    test_source: Source | None = Source.VOXCELEB
    min_test_speaker_recordings: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.test_size < 0 or self.dev_size < 0:
            raise InvalidInputError("split sizes must be >= 0")
        if self.min_test_speaker_recordings < 0:
            raise InvalidInputError("min_test_speaker_recordings must be >= 0")


@dataclass
class _SpeakerInfo:
    count: int = 0
    sources: set = field(default_factory=set)


def _pick_speakers(
    pool: list[tuple[str, int]],
    target: int,
    rng: random.Random,
    what: str,
) -> set[str]:
    """Choose whole speakers whose record counts sum exactly to target.

    Greedy over a seeded shuffle, skipping speakers that would overshoot; if a
    shortfall remains, repair it by swapping one chosen speaker for an
    unchosen one with exactly the needed surplus.
    """
    if target == 0:
        return set()
    order = sorted(pool)
    rng.shuffle(order)
    chosen: list[tuple[str, int]] = []
    skipped: list[tuple[str, int]] = []
    need = target
    for speaker, count in order:
        if count <= need:
            chosen.append((speaker, count))
            need -= count
        else:
            skipped.append((speaker, count))
    if need > 0:
        swap = None
        for c_speaker, c_count in chosen:
            for s_speaker, s_count in skipped:
                if s_count == c_count + need:
                    swap = (c_speaker, s_speaker)
                    break
            if swap:
                break
        if swap is None:
            raise InfeasibleSpecError(
                f"cannot reach {what} size {target}: short by {need} record(s) "
                f"after using all eligible speakers"
            )
        out = {s for s, _ in chosen}
        out.discard(swap[0])
        out.add(swap[1])
        return out
    return {s for s, _ in chosen}


def assign_split_speakers(
    speakers: dict[str, _SpeakerInfo],
    spec: SplitSpec,
) -> dict[str, str]:
    """Map every speaker to train/dev/test under the spec's constraints."""
    total = sum(info.count for info in speakers.values())
    if spec.test_size + spec.dev_size > total:
        raise InfeasibleSpecError(
            f"requested test+dev of {spec.test_size + spec.dev_size} records "
            f"but the manifest has only {total}"
        )
    rng = random.Random(spec.seed)

    test_pool = [
        (speaker, info.count)
        for speaker, info in speakers.items()
        if info.count >= spec.min_test_speaker_recordings
        and (spec.test_source is None or info.sources == {spec.test_source})
    ]
    test_speakers = _pick_speakers(test_pool, spec.test_size, rng, "test")

    dev_pool = [
        (speaker, info.count)
        for speaker, info in speakers.items()
        if speaker not in test_speakers
    ]
    dev_speakers = _pick_speakers(dev_pool, spec.dev_size, rng, "dev")

    assignment = {}
    for speaker in speakers:
        if speaker in test_speakers:
            assignment[speaker] = "test"
        elif speaker in dev_speakers:
            assignment[speaker] = "dev"
        else:
            assignment[speaker] = "train"
    return assignment


def speaker_table(rows: Iterable[tuple[str, Source]]) -> dict[str, _SpeakerInfo]:
    """Aggregate (speaker_id, source) pairs into per-speaker record counts."""
    speakers: dict[str, _SpeakerInfo] = {}
    for speaker_id, source in rows:
        info = speakers.setdefault(speaker_id, _SpeakerInfo())
        info.count += 1
        info.sources.add(source)
    return speakers


def make_splits(manifest: DatasetManifest, spec: SplitSpec) -> DatasetManifest:
    """Return the manifest with a fresh speaker-disjoint split assignment."""
    speakers = speaker_table((r.speaker_id, r.source) for r in manifest.records)
    by_speaker = assign_split_speakers(speakers, spec)
    assignment = {r.utterance_id: by_speaker[r.speaker_id] for r in manifest.records}
    return DatasetManifest(manifest.records, assignment)


# --- statistics -------------------------------------------------------------

@dataclass
class SourceStats:
    num_audio: int = 0
    num_speakers: int = 0
    duration_h: float = 0.0
    num_males: int = 0


@dataclass
class SplitStats:
    num_samples: int = 0
    num_speakers: int = 0
    nv_counts: dict[NvType, int] = field(default_factory=dict)
    emotion_counts: dict[Emotion, int] = field(default_factory=dict)


@dataclass
class DatasetStats:
    nv_counts: dict[NvType, int]
    emotion_counts: dict[Emotion, int]
    sources: dict[Source, SourceStats]
    num_audio: int
    num_speakers: int
    duration_h: float
    splits: dict[str, SplitStats] | None

    def to_dict(self) -> dict:
        out = {
            "num_audio": self.num_audio,
            "num_speakers": self.num_speakers,
            "duration_h": self.duration_h,
            "nv_counts": {t.value: c for t, c in self.nv_counts.items()},
            "emotion_counts": {e.value: c for e, c in self.emotion_counts.items()},
            "sources": {
                s.value: {
                    "num_audio": st.num_audio,
                    "num_speakers": st.num_speakers,
                    "duration_h": st.duration_h,
                    "num_males": st.num_males,
                }
                for s, st in self.sources.items()
            },
        }
        if self.splits is not None:
            out["splits"] = {
                name: {
                    "num_samples": st.num_samples,
                    "num_speakers": st.num_speakers,
                    "nv_counts": {t.value: c for t, c in st.nv_counts.items()},
                    "emotion_counts": {e.value: c for e, c in st.emotion_counts.items()},
                }
                for name, st in self.splits.items()
            }
        return out


def _zero_nv() -> dict[NvType, int]:
    return {t: 0 for t in NvType}


def _zero_emotion() -> dict[Emotion, int]:
    return {e: 0 for e in Emotion}


class StatsAccumulator:
    """Streaming aggregation of manifest statistics, one record at a time.

    Duration sums use exactly-rounded summation so totals are invariant under
    record reordering.
    """

    def __init__(self):
        self.nv_counts = _zero_nv()
        self.emotion_counts = _zero_emotion()
        self._durations: dict[Source, list[float]] = {s: [] for s in Source}
        self._speakers: dict[Source, set] = {s: set() for s in Source}
        self._male_speakers: dict[Source, set] = {s: set() for s in Source}
        self._audio: Counter = Counter()
        self._split_stats: dict[str, SplitStats] = {}
        self._split_speakers: dict[str, set] = {}

    def add(self, record: UtteranceRecord, split: str | None = None) -> None:
        for t, c in record.transcript.nv_counts().items():
            self.nv_counts[t] += c
        self.emotion_counts[record.emotion] += 1
        self._audio[record.source] += 1
        self._durations[record.source].append(record.duration_s)
        self._speakers[record.source].add(record.speaker_id)
        if record.gender is Gender.MALE:
            self._male_speakers[record.source].add(record.speaker_id)
        if split is not None:
            st = self._split_stats.setdefault(
                split, SplitStats(nv_counts=_zero_nv(), emotion_counts=_zero_emotion())
            )
            st.num_samples += 1
            self._split_speakers.setdefault(split, set()).add(record.speaker_id)
            for t, c in record.transcript.nv_counts().items():
                st.nv_counts[t] += c
            st.emotion_counts[record.emotion] += 1

    def finish(self) -> DatasetStats:
        for name, st in self._split_stats.items():
            st.num_speakers = len(self._split_speakers[name])
        sources = {
            s: SourceStats(
                num_audio=self._audio[s],
                num_speakers=len(self._speakers[s]),
                duration_h=math.fsum(self._durations[s]) / 3600.0,
                num_males=len(self._male_speakers[s]),
            )
            for s in Source
        }
        all_speakers = set().union(*self._speakers.values())
        ordered_splits = (
            {n: self._split_stats[n] for n in ("train", "dev", "test") if n in self._split_stats}
            if self._split_stats
            else None
        )
        return DatasetStats(
            nv_counts=self.nv_counts,
            emotion_counts=self.emotion_counts,
            sources=sources,
            num_audio=sum(self._audio.values()),
            num_speakers=len(all_speakers),
            duration_h=math.fsum(d for ds in self._durations.values() for d in ds) / 3600.0,
            splits=ordered_splits,
        )


def compute_stats(manifest: DatasetManifest) -> DatasetStats:
    """Aggregate counts; permutation-invariant over record order."""
    acc = StatsAccumulator()
    for record in manifest.records:
        acc.add(record, manifest.split_of(record.utterance_id))
    return acc.finish()


# --- text tables -------------------------------------------------------------

NV_TABLE_ORDER = tuple(NvType)
EMOTION_TABLE_ORDER = (
    Emotion.NEUTRAL,
    Emotion.HAPPY,
    Emotion.OTHER,
    Emotion.SAD,
    Emotion.DISGUSTED,
    Emotion.SURPRISED,
    Emotion.ANGRY,
    Emotion.FEARFUL,
)
SPLIT_NV_ORDER = (
    NvType.COUGH,
    NvType.SNEEZE,
    NvType.SIGH,
    NvType.BREATH,
    NvType.LAUGH,
    NvType.SNIFF,
    NvType.SNORE,
    NvType.THROAT,
    NvType.GROAN,
    NvType.GRUNT,
)
_SPLIT_NV_HEADERS = {
    NvType.LAUGH: "Laughter",
    NvType.SNORE: "Snoring",
}


def _render_table(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(widths[i]) for i, cell in enumerate(row) if i > 0]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def format_nv_table(nv_counts: dict[NvType, int]) -> str:
    header = ["NV"] + [t.value.capitalize() for t in NV_TABLE_ORDER]
    counts = ["Count"] + [str(nv_counts.get(t, 0)) for t in NV_TABLE_ORDER]
    return _render_table([header, counts])


def format_emotion_table(emotion_counts: dict[Emotion, int]) -> str:
    header = ["Emo"] + [e.value.capitalize() for e in EMOTION_TABLE_ORDER]
    counts = ["Count"] + [str(emotion_counts.get(e, 0)) for e in EMOTION_TABLE_ORDER]
    return _render_table([header, counts])


def format_source_table(stats: DatasetStats) -> str:
    order = (Source.EXPRESSO, Source.VOXCELEB)
    rows = [["Metric"] + [s.value.capitalize() for s in order]]
    rows.append(["Num audio"] + [str(stats.sources[s].num_audio) for s in order])
    rows.append(["Num speakers"] + [str(stats.sources[s].num_speakers) for s in order])
    rows.append(["Duration (h)"] + [f"{stats.sources[s].duration_h:.1f}" for s in order])
    rows.append(["Num males"] + [str(stats.sources[s].num_males) for s in order])
    return _render_table(rows)


def format_split_nv_table(splits: dict[str, SplitStats]) -> str:
    header = ["Split", "Num samples", "Num speakers"]
    header += [_SPLIT_NV_HEADERS.get(t, t.value.capitalize()) for t in SPLIT_NV_ORDER]
    rows = [header]
    for name in ("train", "dev", "test"):
        if name not in splits:
            continue
        st = splits[name]
        rows.append(
            [name, str(st.num_samples), str(st.num_speakers)]
            + [str(st.nv_counts.get(t, 0)) for t in SPLIT_NV_ORDER]
        )
    return _render_table(rows)


def format_split_emotion_table(splits: dict[str, SplitStats]) -> str:
    rows = [["Split"] + [e.value.capitalize() for e in EMOTION_TABLE_ORDER]]
    for name in ("train", "dev", "test"):
        if name not in splits:
            continue
        st = splits[name]
        rows.append([name] + [str(st.emotion_counts.get(e, 0)) for e in EMOTION_TABLE_ORDER])
    return _render_table(rows)


def format_stats(stats: DatasetStats) -> str:
    """All stats tables, paper-table shaped, separated by blank lines."""
    sections = [
        format_source_table(stats),
        format_nv_table(stats.nv_counts),
        format_emotion_table(stats.emotion_counts),
    ]
    if stats.splits:
        sections.append(format_split_nv_table(stats.splits))
        sections.append(format_split_emotion_table(stats.splits))
    return "\n\n".join(sections) + "\n"
