"""Deterministic global pairwise alignment with substitutions disallowed.

Matches score positive, gaps are free by default, and mismatched columns are
forbidden entirely, so the matched-column count of an optimal alignment equals
the longest-common-subsequence length of the two inputs. Annotators disagree
by inserting alternatives, not substituting: disagreeing symbols survive side
by side in separate columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import GranularityMismatchError, InvalidInputError
from .model import GAP, Granularity, Symbol, SymbolKind

MAX_ALIGN_LEN = 100_000


@dataclass(frozen=True)
class AlignmentParams:
    """Scores for the gap-insertion aligner. Mismatches are never allowed."""

    match_score: int = 1
    gap_penalty: int = 0

    def __post_init__(self):
        if self.match_score <= 0:
            raise InvalidInputError("match_score must be positive")
        if self.gap_penalty > 0:
            raise InvalidInputError("gap_penalty must be <= 0")


DEFAULT_PARAMS = AlignmentParams()


@dataclass(frozen=True)
class AlignedPair:
    """Two equal-length gapped sequences; every non-gap column is an exact match."""

    left: tuple[Symbol, ...]
    right: tuple[Symbol, ...]

    def __len__(self) -> int:
        return len(self.left)

    @property
    def matched_columns(self) -> int:
        return sum(1 for a, b in zip(self.left, self.right) if not a.is_gap and not b.is_gap)

    def columns(self):
        return zip(self.left, self.right)


def _sequence_granularity(seq: Sequence[Symbol]) -> Granularity | None:
    """Infer word/char granularity from symbol kinds; None when indeterminate."""
    found: Granularity | None = None
    for sym in seq:
        if sym.kind is SymbolKind.WORD:
            g = Granularity.WORD
        elif sym.kind is SymbolKind.CHAR:
            g = Granularity.CHAR
        else:
            continue
        if found is None:
            found = g
        elif found is not g:
            raise GranularityMismatchError("sequence mixes word and char symbols")
    return found


def check_same_granularity(s: Sequence[Symbol], t: Sequence[Symbol]) -> None:
    gs = _sequence_granularity(s)
    gt = _sequence_granularity(t)
    if gs is not None and gt is not None and gs is not gt:
        raise GranularityMismatchError(f"cannot align {gs.value}-level with {gt.value}-level symbols")


def align(
    s: Sequence[Symbol],
    t: Sequence[Symbol],
    params: AlignmentParams = DEFAULT_PARAMS,
) -> AlignedPair:
    """Globally align two gap-free symbol sequences, maximizing matched columns.

    Deterministic: ties during traceback resolve so that within an ambiguous
    insertion block the first sequence's symbols come before the second's.
    """
    for seq, name in ((s, "first"), (t, "second")):
        if len(seq) > MAX_ALIGN_LEN:
            raise InvalidInputError(f"{name} sequence exceeds {MAX_ALIGN_LEN} symbols")
        for sym in seq:
            if sym.is_gap:
                raise InvalidInputError("alignment inputs must be gap-free")
    check_same_granularity(s, t)

    n, m = len(s), len(t)
    match, gap = params.match_score, params.gap_penalty
    # Plain-tuple keys make the hot equality checks cheap.
    ks = [(sym.kind, sym.value) for sym in s]
    kt = [(sym.kind, sym.value) for sym in t]

    score = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        score[i][0] = i * gap
    row0 = score[0]
    for j in range(1, m + 1):
        row0[j] = j * gap
    for i in range(1, n + 1):
        prev = score[i - 1]
        cur = score[i][0:1]
        key_i = ks[i - 1]
        for j in range(1, m + 1):
            best = prev[j] + gap
            left = cur[j - 1] + gap
            if left > best:
                best = left
            if key_i == kt[j - 1]:
                diag = prev[j - 1] + match
                if diag > best:
                    best = diag
            cur.append(best)
        score[i] = cur

    # Traceback emits columns back-to-front; preferring the right-hand
    # consumption here puts first-sequence symbols first after the reversal.
    left_out: list[Symbol] = []
    right_out: list[Symbol] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ks[i - 1] == kt[j - 1] and score[i][j] == score[i - 1][j - 1] + match:
            left_out.append(s[i - 1])
            right_out.append(t[j - 1])
            i -= 1
            j -= 1
        elif j > 0 and score[i][j] == score[i][j - 1] + gap:
            left_out.append(GAP)
            right_out.append(t[j - 1])
            j -= 1
        else:
            left_out.append(s[i - 1])
            right_out.append(GAP)
            i -= 1
    left_out.reverse()
    right_out.reverse()
    return AlignedPair(tuple(left_out), tuple(right_out))


def strip_gaps(seq: Sequence[Symbol]) -> tuple[Symbol, ...]:
    """Drop all gap symbols, preserving order."""
    return tuple(sym for sym in seq if not sym.is_gap)
