"""Fuse a weak transcription and several annotator hypotheses into one transcript.

Two-stage scheme: fold all hypotheses into a single merged supersequence, then
re-align each hypothesis against it and keep every position that enough
annotators support. The weak machine transcription seeds the merge but does
not vote by default, so symbols only it contains are dropped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .alignment import AlignmentParams, DEFAULT_PARAMS, align, check_same_granularity
from .errors import InvalidThresholdError, NoHypothesesError
from .model import AnnotatorSubmission, Emotion, Granularity, Symbol, Transcript

Symbols = tuple[Symbol, ...]


@dataclass(frozen=True)
class FusionConfig:
    """Voting rule and granularity for fusion.

    ``threshold`` is the absolute number of supporting annotators a symbol
    needs to survive; ``None`` means strict majority (more than half the
    voters). ``include_weak_in_vote`` adds the weak transcription as an extra
    voter, for experimentation.
    """

    granularity: Granularity = Granularity.WORD
    threshold: int | None = 2
    include_weak_in_vote: bool = False
    alignment: AlignmentParams = DEFAULT_PARAMS

    def __post_init__(self):
        if self.threshold is not None and self.threshold < 1:
            raise InvalidThresholdError(f"absolute threshold must be >= 1, got {self.threshold}")

    def required_votes(self, n_voters: int) -> int:
        if self.threshold is None:
            return n_voters // 2 + 1
        if self.threshold > n_voters:
            raise InvalidThresholdError(
                f"threshold {self.threshold} exceeds the {n_voters} available voter(s)"
            )
        return self.threshold


@dataclass(frozen=True)
class FusionTrace:
    """Audit record of one fusion: the merged sequence, each voter's gapped
    projection onto it, per-position support counts, and the kept result."""

    merged: Symbols
    aligned_hypotheses: tuple[Symbols, ...]
    counts: tuple[int, ...]
    result: Transcript


def merge(s: Sequence[Symbol], t: Sequence[Symbol], params: AlignmentParams = DEFAULT_PARAMS) -> Symbols:
    """Combine two sequences into a minimal common supersequence.

    Aligns the inputs, then emits the non-gap symbol of every column (both
    sides of a matched column are equal by construction). The result length is
    ``len(s) + len(t) - lcs(s, t)``.
    """
    pair = align(s, t, params)
    return tuple(a if not a.is_gap else b for a, b in pair.columns())


def merge_all(
    weak: Sequence[Symbol],
    hyps: Sequence[Sequence[Symbol]],
    params: AlignmentParams = DEFAULT_PARAMS,
) -> Symbols:
    """Left-fold merge over the hypotheses, starting from the weak transcription."""
    if not hyps:
        raise NoHypothesesError("merge_all needs at least one hypothesis")
    merged = tuple(weak)
    for hyp in hyps:
        merged = merge(merged, hyp, params)
    return merged


def _project_votes(
    merged: Symbols,
    voters: Sequence[Sequence[Symbol]],
    params: AlignmentParams,
) -> tuple[list[int], list[Symbols]]:
    """Align every voter against merged; return per-position support counts and
    each voter's projection (gapped to exactly len(merged))."""
    counts = [0] * len(merged)
    projections: list[Symbols] = []
    for voter in voters:
        pair = align(merged, voter, params)
        projection: list[Symbol] = []
        pos = 0
        for a, b in pair.columns():
            if a.is_gap:
                # Voter symbol absent from merged: no position to support.
                continue
            if not b.is_gap:
                counts[pos] += 1
            projection.append(b)
            pos += 1
        projections.append(tuple(projection))
    return counts, projections


def majority_vote(
    merged: Sequence[Symbol],
    hyps: Sequence[Sequence[Symbol]],
    cfg: FusionConfig = FusionConfig(),
) -> Transcript:
    """Keep each merged symbol iff enough hypotheses contain it at that position."""
    if not hyps:
        raise NoHypothesesError("majority_vote needs at least one hypothesis")
    merged = tuple(merged)
    need = cfg.required_votes(len(hyps))
    counts, _ = _project_votes(merged, hyps, cfg.alignment)
    kept = tuple(sym for sym, c in zip(merged, counts) if c >= need)
    return Transcript(kept, cfg.granularity)


def fuse(
    weak: Transcript,
    submissions: Sequence[AnnotatorSubmission],
    cfg: FusionConfig = FusionConfig(),
) -> tuple[Transcript, FusionTrace]:
    """Run the full merge-then-vote pipeline for one utterance.

    Returns the fused transcript and a trace for audit. Deterministic:
    identical inputs give identical outputs.
    """
    if not submissions:
        raise NoHypothesesError("fuse needs at least one submission")
    hyps = [sub.transcript.symbols for sub in submissions]
    for hyp in hyps:
        check_same_granularity(weak.symbols, hyp)
    merged = merge_all(weak.symbols, hyps, cfg.alignment)
    voters = list(hyps)
    if cfg.include_weak_in_vote:
        voters.append(weak.symbols)
    need = cfg.required_votes(len(voters))
    counts, projections = _project_votes(merged, voters, cfg.alignment)
    kept = tuple(sym for sym, c in zip(merged, counts) if c >= need)
    result = Transcript(kept, cfg.granularity)
    trace = FusionTrace(
        merged=merged,
        aligned_hypotheses=tuple(projections),
        counts=tuple(counts),
        result=result,
    )
    return result, trace


def fuse_emotion(labels: Sequence[Emotion], threshold: int | None = None) -> Emotion:
    """Majority-vote an emotion label; UNASSIGNED when no label reaches agreement.

    ``threshold`` follows FusionConfig semantics (absolute count, or None for
    strict majority). A tie between two top labels also yields UNASSIGNED.
    """
    if not labels:
        raise NoHypothesesError("fuse_emotion needs at least one label")
    if threshold is None:
        need = len(labels) // 2 + 1
    elif threshold < 1:
        raise InvalidThresholdError(f"absolute threshold must be >= 1, got {threshold}")
    else:
        need = threshold
    tally = Counter(labels)
    (top, top_count), *rest = tally.most_common()
    if top_count < need:
        return Emotion.UNASSIGNED
    if rest and rest[0][1] == top_count:
        return Emotion.UNASSIGNED
    return top
