"""Batch command-line interface wiring the pipeline stages together.

Subcommands: place, fuse, split, stats, eval, plus align/merge debug helpers.
Inputs and outputs are UTF-8 JSONL; processing is line-at-a-time wherever the
operation allows, so corpora larger than memory stream through. All
randomness flows from --seed; given identical inputs and seed, every command
produces byte-identical output.

Exit codes: 0 success, 1 data error, 2 usage error. Set NVFUSE_LOG to
DEBUG/INFO/WARNING/ERROR to control stderr logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

from . import __version__
from .dataset import (
    SplitSpec,
    StatsAccumulator,
    assign_split_speakers,
    discard_reasons,
    format_stats,
    speaker_table,
)
from .errors import DataFormatError, NvFuseError
from .fusion import FusionConfig, fuse, fuse_emotion, merge
from .jsonl import (
    iter_jsonl,
    load_manifest,
    manifest_record_to_obj,
    parse_detections_line,
    parse_hypotheses_line,
    parse_manifest_line,
    parse_timings_line,
    parse_transcripts_line,
)
from .metrics import evaluate
from .model import (
    AnnotatorSubmission,
    DatasetManifest,
    Emotion,
    Granularity,
    Source,
    parse_transcript,
    render_symbols,
    serialize_transcript,
)
from .placement import PlacementConfig, filter_events, place_tags

log = logging.getLogger("nvfuse")


@contextmanager
def _open_out(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fp:
            yield fp


def _write_line(fp, obj: dict) -> None:
    fp.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _map_ordered(fn, items, jobs: int):
    """Apply fn across items with a bounded pool; results come back in input order.

    Submission is windowed so arbitrarily long inputs never pile up in memory.
    """
    if jobs <= 1:
        yield from map(fn, items)
        return
    from collections import deque

    window: deque = deque()
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        try:
            for item in items:
                window.append(executor.submit(fn, item))
                if len(window) >= jobs * 4:
                    yield window.popleft().result()
            while window:
                yield window.popleft().result()
        finally:
            for future in window:
                future.cancel()


def _threshold_arg(args) -> int | None:
    return None if args.majority else args.threshold


# --- place ---------------------------------------------------------------

def cmd_place(args) -> int:
    cfg = PlacementConfig(confidence_threshold=args.threshold)
    detections: dict[str, list] = {}
    with open(args.detections, encoding="utf-8") as fp:
        for line_no, obj in iter_jsonl(fp):
            utt, events = parse_detections_line(obj, line_no)
            detections[utt] = events
    timings: dict[str, list] = {}
    with open(args.timings, encoding="utf-8") as fp:
        for line_no, obj in iter_jsonl(fp):
            utt, words = parse_timings_line(obj, line_no)
            timings[utt] = words

    def work(item):
        line_no, obj = item
        try:
            utt, text = parse_transcripts_line(obj, line_no)
            if utt not in timings:
                raise DataFormatError(line_no, f"no word timings for utterance {utt!r}")
            transcript = parse_transcript(text, Granularity.WORD)
            events = filter_events(detections.get(utt, []), cfg)
            weak = place_tags(timings[utt], transcript, events)
            return utt, {"utterance_id": utt, "weak_transcript": serialize_transcript(weak)}, None
        except NvFuseError as exc:
            return obj.get("utterance_id", f"line {line_no}"), None, exc

    failures = 0
    with open(args.transcripts, encoding="utf-8") as src, _open_out(args.output) as out:
        for utt, obj, exc in _map_ordered(work, iter_jsonl(src), args.jobs):
            if exc is not None:
                failures += 1
                log.error("place failed for %s: %s", utt, exc)
                if not args.keep_going:
                    return 1
                continue
            _write_line(out, obj)
    if failures:
        log.warning("place finished with %d failure(s)", failures)
    return 0


# --- fuse ----------------------------------------------------------------

def _fused_manifest_obj(utt, result, emotion: Emotion) -> dict:
    meta = utt.meta
    return {
        "utterance_id": utt.utterance_id,
        "audio_path": str(meta.get("audio_path", "")),
        "speaker_id": str(meta.get("speaker_id", "")),
        "source": str(meta.get("source", Source.VOXCELEB.value)),
        "duration_s": float(meta.get("duration_s", 0.0)),
        "gender": str(meta.get("gender", "unknown")),
        "transcript": serialize_transcript(result),
        "emotion": None if emotion is Emotion.UNASSIGNED else emotion.value,
        "split": None,
    }


def cmd_fuse(args) -> int:
    granularity = Granularity(args.granularity)
    cfg = FusionConfig(granularity=granularity, threshold=_threshold_arg(args))
    discarded_path = args.discarded
    if discarded_path is None and args.output not in (None, "-"):
        discarded_path = args.output + ".discarded.jsonl"

    def work(item):
        line_no, obj = item
        try:
            utt = parse_hypotheses_line(obj, line_no)
            reasons = discard_reasons([s.flags for s in utt.submissions], cfg.threshold)
            if reasons:
                return utt.utterance_id, ("discard", {"utterance_id": utt.utterance_id, "reasons": list(reasons)}), None
            weak = parse_transcript(utt.weak_transcript, granularity)
            submissions = [
                AnnotatorSubmission(
                    transcript=parse_transcript(s.transcript, granularity),
                    emotion=s.emotion,
                    flags=s.flags,
                )
                for s in utt.submissions
            ]
            result, trace = fuse(weak, submissions, cfg)
            emotion = fuse_emotion([s.emotion for s in submissions], cfg.threshold)
            payload = {
                "manifest": _fused_manifest_obj(utt, result, emotion),
                "trace": {
                    "utterance_id": utt.utterance_id,
                    "merged": render_symbols(trace.merged, granularity),
                    "counts": list(trace.counts),
                    "result": serialize_transcript(result),
                },
            }
            return utt.utterance_id, ("fused", payload), None
        except NvFuseError as exc:
            return obj.get("utterance_id", f"line {line_no}"), None, exc

    failures = 0
    trace_fp = open(args.trace, "w", encoding="utf-8") if args.trace else None
    discard_fp = open(discarded_path, "w", encoding="utf-8") if discarded_path else None
    try:
        with open(args.hypotheses, encoding="utf-8") as src, _open_out(args.output) as out:
            for utt_id, outcome, exc in _map_ordered(work, iter_jsonl(src), args.jobs):
                if exc is not None:
                    failures += 1
                    log.error("fuse failed for %s: %s", utt_id, exc)
                    if not args.keep_going:
                        return 1
                    continue
                kind, payload = outcome
                if kind == "discard":
                    if discard_fp is not None:
                        _write_line(discard_fp, payload)
                    else:
                        log.warning("discarded %s: %s", utt_id, ",".join(payload["reasons"]))
                    continue
                _write_line(out, payload["manifest"])
                if trace_fp is not None:
                    _write_line(trace_fp, payload["trace"])
    finally:
        if trace_fp is not None:
            trace_fp.close()
        if discard_fp is not None:
            discard_fp.close()
    if failures:
        log.warning("fuse finished with %d failure(s)", failures)
    return 0


# --- split ---------------------------------------------------------------

def cmd_split(args) -> int:
    source = None if args.test_source == "any" else Source(args.test_source)
    spec = SplitSpec(
        test_size=args.test_size,
        dev_size=args.dev_size,
        test_source=source,
        min_test_speaker_recordings=args.min_test_speaker_recordings,
        seed=args.seed,
    )
    # Pass 1: speaker-level record counts (constant memory in record count).
    rows = []
    with open(args.manifest, encoding="utf-8") as fp:
        for line_no, obj in iter_jsonl(fp):
            record, _ = parse_manifest_line(obj, line_no)
            rows.append((record.speaker_id, record.source))
    by_speaker = assign_split_speakers(speaker_table(rows), spec)
    # Pass 2: rewrite records with their split.
    with open(args.manifest, encoding="utf-8") as src, _open_out(args.output) as out:
        for line_no, obj in iter_jsonl(src):
            record, _ = parse_manifest_line(obj, line_no)
            _write_line(out, manifest_record_to_obj(record, by_speaker[record.speaker_id]))
    return 0


# --- stats ---------------------------------------------------------------

def cmd_stats(args) -> int:
    acc = StatsAccumulator()
    seen = set()
    with open(args.manifest, encoding="utf-8") as fp:
        for line_no, obj in iter_jsonl(fp):
            record, split = parse_manifest_line(obj, line_no)
            if record.utterance_id in seen:
                raise DataFormatError(line_no, f"duplicate utterance_id {record.utterance_id!r}")
            seen.add(record.utterance_id)
            acc.add(record, split)
    stats = acc.finish()
    with _open_out(args.output) as out:
        if args.report == "json":
            out.write(json.dumps(stats.to_dict(), ensure_ascii=False, indent=2) + "\n")
        else:
            out.write(format_stats(stats))
    return 0


# --- eval ----------------------------------------------------------------

def _load_detection_sets(path: str, threshold: float) -> dict:
    from collections import Counter

    cfg = PlacementConfig(confidence_threshold=threshold)
    out = {}
    with open(path, encoding="utf-8") as fp:
        for line_no, obj in iter_jsonl(fp):
            utt, events = parse_detections_line(obj, line_no)
            out[utt] = Counter(e.nv_type for e in filter_events(events, cfg))
    return out


def cmd_eval(args) -> int:
    ref_records, _ = load_manifest(args.ref)
    hyp_records, _ = load_manifest(args.hyp)
    ref_nvs = _load_detection_sets(args.ref_detections, args.nv_threshold) if args.ref_detections else None
    hyp_nvs = _load_detection_sets(args.hyp_detections, args.nv_threshold) if args.hyp_detections else None
    report = evaluate(
        DatasetManifest(tuple(ref_records)),
        DatasetManifest(tuple(hyp_records)),
        reference_nvs=ref_nvs,
        hypothesis_nvs=hyp_nvs,
        label=args.label,
    )
    with _open_out(args.output) as out:
        if args.report == "json":
            out.write(json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n")
        else:
            out.write(report.to_table())
    return 0


# --- debug helpers ---------------------------------------------------------

def cmd_align(args) -> int:
    from .alignment import align

    granularity = Granularity(args.granularity)
    a = parse_transcript(args.a, granularity)
    b = parse_transcript(args.b, granularity)
    pair = align(a.symbols, b.symbols)
    left = [sym.token() for sym in pair.left]
    right = [sym.token() for sym in pair.right]
    widths = [max(len(x), len(y)) for x, y in zip(left, right)]
    with _open_out(args.output) as out:
        out.write("left:  " + " ".join(x.ljust(w) for x, w in zip(left, widths)).rstrip() + "\n")
        out.write("right: " + " ".join(y.ljust(w) for y, w in zip(right, widths)).rstrip() + "\n")
        out.write(f"matched columns: {pair.matched_columns}\n")
    return 0


def cmd_merge(args) -> int:
    granularity = Granularity(args.granularity)
    merged = parse_transcript(args.texts[0], granularity).symbols
    for text in args.texts[1:]:
        merged = merge(merged, parse_transcript(text, granularity).symbols)
    with _open_out(args.output) as out:
        out.write(render_symbols(merged, granularity) + "\n")
    return 0


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvfuse",
        description="Multi-annotator transcript fusion and dataset tooling "
        "for nonverbal-vocalization speech corpora.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness (splits)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers; output order is preserved")
    parser.add_argument(
        "--keep-going",
        action="store_true",
        help="log per-utterance errors and continue instead of aborting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("-o", "--output", default="-", help="output path ('-' for stdout)")

    p = sub.add_parser("place", help="insert detected NV tags into transcripts by timestamp")
    p.add_argument("--detections", required=True, help="detections JSONL")
    p.add_argument("--timings", required=True, help="forced-alignment word timings JSONL")
    p.add_argument("--transcripts", required=True, help="plain transcripts JSONL")
    p.add_argument("--threshold", type=float, default=0.1, help="detection confidence cutoff (inclusive)")
    add_output(p)
    p.set_defaults(func=cmd_place)

    p = sub.add_parser("fuse", help="fuse annotator hypotheses into final transcripts")
    p.add_argument("--hypotheses", required=True, help="hypotheses JSONL")
    p.add_argument("--granularity", choices=[g.value for g in Granularity], default="word")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--threshold", type=int, default=2, help="votes a symbol needs to survive")
    group.add_argument("--majority", action="store_true", help="strict majority instead of an absolute count")
    p.add_argument("--trace", default=None, help="write per-utterance fusion traces to this JSONL file")
    p.add_argument(
        "--discarded",
        default=None,
        help="sidecar JSONL for discarded utterances (default: OUTPUT.discarded.jsonl)",
    )
    add_output(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("split", help="assign speaker-disjoint train/dev/test splits")
    p.add_argument("--manifest", required=True, help="manifest JSONL")
    p.add_argument("--test-size", type=int, default=359)
    p.add_argument("--dev-size", type=int, default=46)
    p.add_argument("--test-source", choices=[s.value for s in Source] + ["any"], default="voxceleb")
    p.add_argument("--min-test-speaker-recordings", type=int, default=2)
    add_output(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="dataset statistics from a manifest")
    p.add_argument("--manifest", required=True, help="manifest JSONL")
    p.add_argument("--report", choices=["json", "table"], default="table")
    add_output(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="WER and NV Jaccard between two manifests")
    p.add_argument("--ref", required=True, help="reference manifest JSONL")
    p.add_argument("--hyp", required=True, help="hypothesis manifest JSONL")
    p.add_argument("--ref-detections", default=None, help="detections JSONL overriding reference NV sets")
    p.add_argument("--hyp-detections", default=None, help="detections JSONL overriding hypothesis NV sets")
    p.add_argument("--nv-threshold", type=float, default=0.1, help="confidence cutoff for detection overrides")
    p.add_argument("--report", choices=["json", "table"], default="table")
    p.add_argument("--label", default="hypothesis", help="row label in the report table")
    add_output(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("align", help="debug: align two transcript strings")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--granularity", choices=[g.value for g in Granularity], default="word")
    add_output(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("merge", help="debug: fold transcript strings into one supersequence")
    p.add_argument("texts", nargs="+", metavar="TEXT")
    p.add_argument("--granularity", choices=[g.value for g in Granularity], default="word")
    add_output(p)
    p.set_defaults(func=cmd_merge)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("NVFUSE_LOG", "WARNING").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NvFuseError as exc:
        log.error("%s", exc)
        return 1
    except OSError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
