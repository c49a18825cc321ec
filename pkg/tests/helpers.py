"""Shared fixture builders for the test suite."""

import json
import random

from nvfuse.model import (
    DatasetManifest,
    Emotion,
    Gender,
    Granularity,
    NvType,
    Source,
    Symbol,
    UtteranceRecord,
    parse_transcript,
)

WORD_ALPHABET = ("a", "b", "c")


def word_symbols(tokens):
    return tuple(Symbol.word(tok) for tok in tokens)


def random_tokens(rng: random.Random, max_len: int, alphabet=WORD_ALPHABET):
    return tuple(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))


def record(
    utt_id: str,
    speaker: str,
    source: Source = Source.VOXCELEB,
    text: str = "hello there",
    emotion: Emotion = Emotion.NEUTRAL,
    duration_s: float = 3.0,
    gender: Gender = Gender.FEMALE,
) -> UtteranceRecord:
    return UtteranceRecord(
        utterance_id=utt_id,
        audio_path=f"audio/{utt_id}.wav",
        speaker_id=speaker,
        source=source,
        duration_s=duration_s,
        gender=gender,
        transcript=parse_transcript(text, Granularity.WORD),
        emotion=emotion,
    )


def synthetic_split_manifest() -> DatasetManifest:
    """200 speakers: 100 voxceleb x2 recordings, 40 expresso x2, 30 expresso x3,
    30 expresso x1 (400 records total)."""
    records = []

    def add(speaker: str, source: Source, n: int):
        for k in range(n):
            records.append(record(f"{speaker}-u{k}", speaker, source))

    for i in range(100):
        add(f"vox{i:03d}", Source.VOXCELEB, 2)
    for i in range(40):
        add(f"exp2-{i:03d}", Source.EXPRESSO, 2)
    for i in range(30):
        add(f"exp3-{i:03d}", Source.EXPRESSO, 3)
    for i in range(30):
        add(f"exp1-{i:03d}", Source.EXPRESSO, 1)
    return DatasetManifest(tuple(records))


NV_TAG_TOKENS = tuple(f"[{t.value}]" for t in NvType)


def random_transcript_text(rng: random.Random, max_tokens: int = 12) -> str:
    """Whitespace-normalized tag-bearing transcript text."""
    words = ("It's", "a", "cat", "dog", "on", "the", "mat", "sofa", "uh", "Okay")
    out = []
    for _ in range(rng.randint(1, max_tokens)):
        if rng.random() < 0.3:
            out.append(rng.choice(NV_TAG_TOKENS))
        else:
            out.append(rng.choice(words))
    return " ".join(out)


def write_jsonl_file(path, objects):
    with open(path, "w", encoding="utf-8") as fp:
        for obj in objects:
            fp.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return str(path)


def manifest_objs(manifest: DatasetManifest):
    from nvfuse.jsonl import manifest_record_to_obj

    return [
        manifest_record_to_obj(r, manifest.split_of(r.utterance_id))
        for r in manifest.records
    ]
