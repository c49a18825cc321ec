"""Multi-annotator transcript fusion and dataset tooling for speech corpora
with nonverbal-vocalization tags.

The pipeline: place detected NV tags into machine transcripts, fuse several
human refinements by alignment and majority vote, filter and split the
resulting manifest, and score transcripts with non-neural metrics.
"""

__version__ = "0.1.0"

from .alignment import AlignedPair, AlignmentParams, align, strip_gaps
from .dataset import (
    DatasetStats,
    SplitSpec,
    apply_discard_rules,
    compute_stats,
    make_splits,
)
from .errors import NvFuseError
from .fusion import (
    FusionConfig,
    FusionTrace,
    fuse,
    fuse_emotion,
    majority_vote,
    merge,
    merge_all,
)
from .metrics import (
    EvalPair,
    EvalReport,
    edit_distance,
    evaluate,
    jaccard_index,
    jaccard_per_category,
    wer,
    wilson_interval_cc,
)
from .model import (
    GAP,
    AnnotatorSubmission,
    DatasetManifest,
    DetectionEvent,
    DiscardFlags,
    Emotion,
    Gender,
    Granularity,
    NvType,
    Source,
    Symbol,
    SymbolKind,
    Transcript,
    UtteranceRecord,
    WordTiming,
    parse_transcript,
    render_symbols,
    serialize_transcript,
)
from .placement import PlacementConfig, filter_events, place_tags, strip_nv_tags

__all__ = [
    "AlignedPair",
    "AlignmentParams",
    "AnnotatorSubmission",
    "DatasetManifest",
    "DatasetStats",
    "DetectionEvent",
    "DiscardFlags",
    "Emotion",
    "EvalPair",
    "EvalReport",
    "FusionConfig",
    "FusionTrace",
    "GAP",
    "Gender",
    "Granularity",
    "NvFuseError",
    "NvType",
    "PlacementConfig",
    "Source",
    "SplitSpec",
    "Symbol",
    "SymbolKind",
    "Transcript",
    "UtteranceRecord",
    "WordTiming",
    "align",
    "apply_discard_rules",
    "compute_stats",
    "edit_distance",
    "evaluate",
    "filter_events",
    "fuse",
    "fuse_emotion",
    "jaccard_index",
    "jaccard_per_category",
    "majority_vote",
    "make_splits",
    "merge",
    "merge_all",
    "parse_transcript",
    "place_tags",
    "render_symbols",
    "serialize_transcript",
    "strip_gaps",
    "strip_nv_tags",
    "wer",
    "wilson_interval_cc",
]
