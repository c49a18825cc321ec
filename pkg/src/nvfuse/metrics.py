"""Non-neural evaluation metrics: NV-set Jaccard, WER, Wilson interval.

Jaccard is reported as a similarity (higher is better). WER pools edit counts
over the corpus by default; a per-utterance mean is reported alongside.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Iterable, Sequence

from .errors import EmptyReferenceError, InvalidInputError, PairingError
from .model import DatasetManifest, NvType, SymbolKind, UtteranceRecord

_NV_TOKENS = {f"[{t.value}]" for t in NvType}


def _presence_set(x: Iterable[NvType]) -> set[NvType]:
    if isinstance(x, Counter):
        return {k for k, v in x.items() if v > 0}
    return set(x)


def jaccard_index(a: Iterable[NvType], b: Iterable[NvType]) -> float:
    """|a ∩ b| / |a ∪ b| over NV type sets; two empty sets agree perfectly (1.0)."""
    sa, sb = _presence_set(a), _presence_set(b)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


@dataclass(frozen=True)
class EvalPair:
    """Reference vs hypothesis for one utterance."""

    utterance_id: str
    reference_nvs: Counter
    hypothesis_nvs: Counter
    reference_words: tuple[str, ...]
    hypothesis_words: tuple[str, ...]


def jaccard_per_category(
    pairs: Sequence[EvalPair],
    cat: NvType,
    mode: str = "binary",
) -> float | None:
    """Per-category agreement across pairs; None when no pair involves the category.

    "binary" scores presence agreement: pairs where both sides contain the
    category over pairs where either does. "multiset" averages
    min(count)/max(count) over the same qualifying pairs.
    """
    if mode not in ("binary", "multiset"):
        raise InvalidInputError(f"unknown per-category mode: {mode!r}")
    either = 0
    both = 0
    ratios = []
    for pair in pairs:
        rc = pair.reference_nvs.get(cat, 0)
        hc = pair.hypothesis_nvs.get(cat, 0)
        if rc or hc:
            either += 1
            if rc and hc:
                both += 1
            ratios.append(min(rc, hc) / max(rc, hc))
    if either == 0:
        return None
    if mode == "binary":
        return both / either
    return sum(ratios) / len(ratios)


def _strip_nv_tokens(words: Sequence[str]) -> list[str]:
    return [w for w in words if w not in _NV_TOKENS]


def edit_distance(reference: Sequence[str], hypothesis: Sequence[str]) -> int:
    """Minimal substitutions + deletions + insertions turning reference into hypothesis."""
    n, m = len(reference), len(hypothesis)
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        r = reference[i - 1]
        for j in range(1, m + 1):
            if r == hypothesis[j - 1]:
                cur[j] = prev[j - 1]
            else:
                cur[j] = 1 + min(prev[j - 1], prev[j], cur[j - 1])
        prev = cur
    return prev[m]


def wer(reference: Sequence[str], hypothesis: Sequence[str], strip_nv: bool = True) -> float:
    """Word error rate: minimal edits divided by reference length.

    Nonverbal tag tokens are removed from both sides first unless strip_nv is
    False; the reference must be non-empty after stripping.
    """
    if strip_nv:
        reference = _strip_nv_tokens(reference)
        hypothesis = _strip_nv_tokens(hypothesis)
    if not reference:
        raise EmptyReferenceError("reference is empty (after tag stripping)")
    return edit_distance(reference, hypothesis) / len(reference)


def wilson_interval_cc(
    successes: int,
    trials: int,
    confidence: float = 0.95,
) -> tuple[float, float]:
    """Continuity-corrected Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise InvalidInputError("trials must be > 0")
    if not 0 <= successes <= trials:
        raise InvalidInputError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < confidence < 1.0:
        raise InvalidInputError(f"confidence must lie in (0, 1), got {confidence}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    n = float(trials)
    p = successes / n
    z2 = z * z
    denom = 2.0 * (n + z2)
    if successes == 0:
        low = 0.0
    else:
        low_num = 2.0 * n * p + z2 - 1.0 - z * math.sqrt(
            z2 - 2.0 - 1.0 / n + 4.0 * p * (n * (1.0 - p) + 1.0)
        )
        low = max(0.0, low_num / denom)
    if successes == trials:
        high = 1.0
    else:
        high_num = 2.0 * n * p + z2 + 1.0 + z * math.sqrt(
            z2 + 2.0 - 1.0 / n + 4.0 * p * (n * (1.0 - p) - 1.0)
        )
        high = min(1.0, high_num / denom)
    return low, high


# --- corpus-level evaluation -------------------------------------------------

EVAL_TABLE_COLUMNS = ("SIM-o", "WER", "EMO-SIM", "DNSMOS", "J_cough", "J_breath", "J_laugh", "J")


@dataclass
class EvalReport:
    num_pairs: int
    wer_corpus: float
    wer_utterance_mean: float | None
    jaccard_mean: float
    jaccard_per_category: dict[NvType, float | None]
    total_edits: int
    total_reference_words: int
    label: str = "hypothesis"
    skipped_empty_references: int = 0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "num_pairs": self.num_pairs,
            "wer": self.wer_corpus,
            "wer_utterance_mean": self.wer_utterance_mean,
            "jaccard": self.jaccard_mean,
            "jaccard_per_category": {
                t.value: v for t, v in self.jaccard_per_category.items()
            },
            "total_edits": self.total_edits,
            "total_reference_words": self.total_reference_words,
            "skipped_empty_references": self.skipped_empty_references,
        }

    def to_table(self) -> str:
        def fmt(v: float | None) -> str:
            return "n/a" if v is None else f"{v:.3f}"

        values = {
            "SIM-o": None,
            "WER": self.wer_corpus,
            "EMO-SIM": None,
            "DNSMOS": None,
            "J_cough": self.jaccard_per_category.get(NvType.COUGH),
            "J_breath": self.jaccard_per_category.get(NvType.BREATH),
            "J_laugh": self.jaccard_per_category.get(NvType.LAUGH),
            "J": self.jaccard_mean,
        }
        header = ["Model"] + list(EVAL_TABLE_COLUMNS)
        row = [self.label] + [fmt(values[c]) for c in EVAL_TABLE_COLUMNS]
        widths = [max(len(h), len(r)) for h, r in zip(header, row)]
        lines = [
            "  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(header, widths))),
            "  ".join(r.ljust(w) if i == 0 else r.rjust(w) for i, (r, w) in enumerate(zip(row, widths))),
        ]
        return "\n".join(line.rstrip() for line in lines) + "\n"


def record_words(record: UtteranceRecord, strip_nv: bool = True) -> tuple[str, ...]:
    """Word tokens of a record's transcript; NV tags render as bracketed tokens
    when kept."""
    if strip_nv:
        return tuple(
            sym.value for sym in record.transcript.symbols if sym.kind is SymbolKind.WORD
        )
    return tuple(sym.token() for sym in record.transcript.symbols)


def build_eval_pairs(
    reference: DatasetManifest,
    hypothesis: DatasetManifest,
    reference_nvs: dict[str, Counter] | None = None,
    hypothesis_nvs: dict[str, Counter] | None = None,
    strip_nv: bool = True,
) -> list[EvalPair]:
    """Pair records by utterance id; the two manifests must cover identical ids.

    NV multisets default to tag occurrences in each transcript but can be
    overridden (e.g. with externally detected events).
    """
    ref_by_id = {r.utterance_id: r for r in reference.records}
    hyp_by_id = {r.utterance_id: r for r in hypothesis.records}
    if set(ref_by_id) != set(hyp_by_id):
        missing_hyp = sorted(set(ref_by_id) - set(hyp_by_id))[:5]
        missing_ref = sorted(set(hyp_by_id) - set(ref_by_id))[:5]
        raise PairingError(
            f"manifests cover different utterance ids "
            f"(only in reference: {missing_hyp}, only in hypothesis: {missing_ref})"
        )
    if not ref_by_id:
        raise PairingError("no utterance ids to pair")
    pairs = []
    for utt_id in ref_by_id:
        ref, hyp = ref_by_id[utt_id], hyp_by_id[utt_id]
        r_nvs = (
            reference_nvs.get(utt_id, Counter())
            if reference_nvs is not None
            else Counter(ref.transcript.nv_counts())
        )
        h_nvs = (
            hypothesis_nvs.get(utt_id, Counter())
            if hypothesis_nvs is not None
            else Counter(hyp.transcript.nv_counts())
        )
        pairs.append(
            EvalPair(
                utterance_id=utt_id,
                reference_nvs=r_nvs,
                hypothesis_nvs=h_nvs,
                reference_words=record_words(ref, strip_nv),
                hypothesis_words=record_words(hyp, strip_nv),
            )
        )
    pairs.sort(key=lambda p: p.utterance_id)
    return pairs


def evaluate_pairs(pairs: Sequence[EvalPair], label: str = "hypothesis") -> EvalReport:
    """Aggregate WER and Jaccard metrics over id-aligned pairs.

    Corpus WER pools edit counts over pooled reference length; utterances with
    empty references still contribute their insertions to the pooled counts
    but are excluded from the per-utterance mean.
    """
    if not pairs:
        raise PairingError("no pairs to evaluate")
    total_edits = 0
    total_ref = 0
    per_utt = []
    skipped = 0
    jaccards = []
    for pair in pairs:
        edits = edit_distance(pair.reference_words, pair.hypothesis_words)
        total_edits += edits
        total_ref += len(pair.reference_words)
        if pair.reference_words:
            per_utt.append(edits / len(pair.reference_words))
        else:
            skipped += 1
        jaccards.append(jaccard_index(pair.reference_nvs, pair.hypothesis_nvs))
    if total_ref == 0:
        raise EmptyReferenceError("every reference transcript is empty")
    per_cat = {t: jaccard_per_category(pairs, t) for t in NvType}
    return EvalReport(
        num_pairs=len(pairs),
        wer_corpus=total_edits / total_ref,
        wer_utterance_mean=(sum(per_utt) / len(per_utt)) if per_utt else None,
        jaccard_mean=sum(jaccards) / len(jaccards),
        jaccard_per_category=per_cat,
        total_edits=total_edits,
        total_reference_words=total_ref,
        skipped_empty_references=skipped,
        label=label,
    )


def evaluate(
    reference: DatasetManifest,
    hypothesis: DatasetManifest,
    reference_nvs: dict[str, Counter] | None = None,
    hypothesis_nvs: dict[str, Counter] | None = None,
    strip_nv: bool = True,
    label: str = "hypothesis",
) -> EvalReport:
    """Pair two manifests by utterance id and compute the evaluation report."""
    pairs = build_eval_pairs(reference, hypothesis, reference_nvs, hypothesis_nvs, strip_nv)
    return evaluate_pairs(pairs, label=label)
