import random

import pytest

from nvfuse.dataset import (
    SplitSpec,
    apply_discard_rules,
    compute_stats,
    discard_reasons,
    format_emotion_table,
    format_nv_table,
    format_split_nv_table,
    format_stats,
    make_splits,
)
from nvfuse.errors import InfeasibleSpecError
from nvfuse.jsonl import UtteranceHypotheses, RawSubmission
from nvfuse.model import (
    DatasetManifest,
    DiscardFlags,
    Emotion,
    Gender,
    NvType,
    Source,
)

from helpers import record, synthetic_split_manifest


CLEAN = DiscardFlags()
MULTI = DiscardFlags(multi_speaker=True)
NON_EN = DiscardFlags(non_english=True)


def _hyp_record(utt_id, flags_list):
    subs = tuple(RawSubmission("hi", Emotion.NEUTRAL, f) for f in flags_list)
    return UtteranceHypotheses(utt_id, "hi", subs)


class TestDiscardRules:
    def test_majority_flag_discards(self):
        assert discard_reasons([MULTI, MULTI, CLEAN], 2) == ("multi_speaker",)

    def test_all_clean_kept(self):
        assert discard_reasons([CLEAN, CLEAN, CLEAN], 2) == ()

    def test_flags_vote_independently(self):
        # Two different flags with one vote each do not add up to a discard.
        assert discard_reasons([NON_EN, MULTI, CLEAN], 2) == ()

    def test_strict_majority_default(self):
        assert discard_reasons([MULTI, MULTI, CLEAN]) == ("multi_speaker",)
        assert discard_reasons([MULTI, CLEAN]) == ()

    def test_multiple_winning_flags(self):
        both = DiscardFlags(non_english=True, background_nv=True)
        assert discard_reasons([both, both, CLEAN], 2) == ("non_english", "background_nv")

    def test_partition(self):
        records = [
            _hyp_record("u1", [MULTI, MULTI, CLEAN]),
            _hyp_record("u2", [CLEAN, CLEAN, CLEAN]),
            _hyp_record("u3", [NON_EN, MULTI, CLEAN]),
        ]
        kept, discarded = apply_discard_rules(records, 2)
        assert [u.utterance_id for u in kept] == ["u2", "u3"]
        assert [(u.utterance_id, r) for u, r in discarded] == [("u1", ("multi_speaker",))]
        assert len(kept) + len(discarded) == len(records)


class TestMakeSplits:
    SPEC = SplitSpec(test_size=60, dev_size=41, seed=5)

    def test_constraints_hold(self):
        manifest = synthetic_split_manifest()
        out = make_splits(manifest, self.SPEC)
        by_split = {"train": set(), "dev": set(), "test": set()}
        sizes = {"train": 0, "dev": 0, "test": 0}
        speaker_records = {}
        for r in manifest.records:
            speaker_records[r.speaker_id] = speaker_records.get(r.speaker_id, 0) + 1
        for r in out.records:
            split = out.split_of(r.utterance_id)
            by_split[split].add(r.speaker_id)
            sizes[split] += 1
            if split == "test":
                assert r.source is Source.VOXCELEB
                assert speaker_records[r.speaker_id] >= 2
        assert sizes == {"test": 60, "dev": 41, "train": 400 - 60 - 41}
        assert not (by_split["train"] & by_split["dev"])
        assert not (by_split["train"] & by_split["test"])
        assert not (by_split["dev"] & by_split["test"])

    def test_deterministic(self):
        manifest = synthetic_split_manifest()
        a = make_splits(manifest, self.SPEC)
        b = make_splits(manifest, self.SPEC)
        assert a.split_assignment == b.split_assignment

    def test_seed_changes_assignment(self):
        manifest = synthetic_split_manifest()
        a = make_splits(manifest, SplitSpec(test_size=60, dev_size=41, seed=1))
        b = make_splits(manifest, SplitSpec(test_size=60, dev_size=41, seed=2))
        assert a.split_assignment != b.split_assignment

    def test_zero_sizes_all_train(self):
        manifest = synthetic_split_manifest()
        out = make_splits(manifest, SplitSpec(test_size=0, dev_size=0, seed=0))
        assert set(out.split_assignment.values()) == {"train"}

    def test_min_recordings_respected(self):
        records = tuple(
            record(f"u{i}", f"spk{i}", Source.VOXCELEB) for i in range(10)
        )  # every speaker has a single recording
        manifest = DatasetManifest(records)
        with pytest.raises(InfeasibleSpecError):
            make_splits(manifest, SplitSpec(test_size=2, dev_size=0, min_test_speaker_recordings=2))

    def test_source_restriction(self):
        records = tuple(
            record(f"u{i}{k}", f"spk{i}", Source.EXPRESSO)
            for i in range(5)
            for k in range(2)
        )
        manifest = DatasetManifest(records)
        with pytest.raises(InfeasibleSpecError):
            make_splits(manifest, SplitSpec(test_size=2, dev_size=0))
        out = make_splits(manifest, SplitSpec(test_size=2, dev_size=0, test_source=Source.EXPRESSO))
        assert sum(1 for v in out.split_assignment.values() if v == "test") == 2

    def test_oversized_request(self):
        manifest = DatasetManifest((record("u1", "s1"),))
        with pytest.raises(InfeasibleSpecError):
            make_splits(manifest, SplitSpec(test_size=1, dev_size=1))

    def test_substitution_repairs_shortfall(self):
        # Speakers with 3 and 4 recordings; target 4 is only reachable either
        # directly or by swapping the 3 for the 4 after a shortfall of 1.
        records = tuple(
            record(f"a{k}", "spk_a", Source.VOXCELEB) for k in range(3)
        ) + tuple(record(f"b{k}", "spk_b", Source.VOXCELEB) for k in range(4))
        manifest = DatasetManifest(records)
        for seed in range(10):
            out = make_splits(manifest, SplitSpec(test_size=4, dev_size=0, seed=seed))
            test_speakers = {
                r.speaker_id
                for r in out.records
                if out.split_assignment[r.utterance_id] == "test"
            }
            assert test_speakers == {"spk_b"}

    def test_disjoint_over_many_seeds(self):
        manifest = synthetic_split_manifest()
        for seed in range(20):
            out = make_splits(manifest, SplitSpec(test_size=60, dev_size=41, seed=seed))
            speakers = {}
            for r in out.records:
                split = out.split_assignment[r.utterance_id]
                speakers.setdefault(r.speaker_id, set()).add(split)
            assert all(len(s) == 1 for s in speakers.values())


class TestComputeStats:
    def _manifest(self):
        return DatasetManifest(
            (
                record("u1", "s1", Source.VOXCELEB, "[breath] hi [breath]",
                       Emotion.HAPPY, 3600.0, Gender.MALE),
                record("u2", "s2", Source.EXPRESSO, "ha [laugh]",
                       Emotion.HAPPY, 1800.0, Gender.FEMALE),
                record("u3", "s1", Source.VOXCELEB, "plain words",
                       Emotion.UNASSIGNED, 1800.0, Gender.MALE),
            )
        )

    def test_tag_occurrence_counting(self):
        stats = compute_stats(self._manifest())
        assert stats.nv_counts[NvType.BREATH] == 2
        assert stats.nv_counts[NvType.LAUGH] == 1
        assert stats.nv_counts[NvType.COUGH] == 0

    def test_emotions_and_sources(self):
        stats = compute_stats(self._manifest())
        assert stats.emotion_counts[Emotion.HAPPY] == 2
        assert stats.emotion_counts[Emotion.UNASSIGNED] == 1
        vox = stats.sources[Source.VOXCELEB]
        assert vox.num_audio == 2 and vox.num_speakers == 1 and vox.num_males == 1
        assert vox.duration_h == pytest.approx(1.5)
        assert stats.num_audio == 3 and stats.num_speakers == 2
        assert stats.duration_h == pytest.approx(2.0)

    def test_empty_manifest(self):
        stats = compute_stats(DatasetManifest(()))
        assert all(v == 0 for v in stats.nv_counts.values())
        assert all(v == 0 for v in stats.emotion_counts.values())
        assert stats.num_audio == 0 and stats.duration_h == 0.0
        assert stats.splits is None

    def test_permutation_invariant(self):
        rng = random.Random(41)
        records = [
            record(f"u{i}", f"s{i % 7}", rng.choice(list(Source)),
                   "w [breath]", Emotion.NEUTRAL, rng.random() * 100)
            for i in range(50)
        ]
        base = compute_stats(DatasetManifest(tuple(records)))
        shuffled = records[:]
        rng.shuffle(shuffled)
        other = compute_stats(DatasetManifest(tuple(shuffled)))
        assert base.to_dict() == other.to_dict()

    def test_split_breakdown(self):
        manifest = self._manifest()
        with_splits = DatasetManifest(
            manifest.records, {"u1": "train", "u2": "test", "u3": "train"}
        )
        stats = compute_stats(with_splits)
        assert set(stats.splits) == {"train", "test"}
        assert stats.splits["train"].num_samples == 2
        assert stats.splits["train"].num_speakers == 1
        assert stats.splits["train"].nv_counts[NvType.BREATH] == 2
        assert stats.splits["test"].emotion_counts[Emotion.HAPPY] == 1


class TestTables:
    def test_nv_table_order(self):
        stats = compute_stats(DatasetManifest(()))
        table = format_nv_table(stats.nv_counts)
        header = table.splitlines()[0].split()
        assert header == [
            "NV", "Breath", "Laugh", "Sniff", "Cough", "Throat",
            "Sigh", "Groan", "Sneeze", "Snore", "Grunt",
        ]

    def test_emotion_table_order(self):
        table = format_emotion_table({e: 0 for e in Emotion})
        header = table.splitlines()[0].split()
        assert header == [
            "Emo", "Neutral", "Happy", "Other", "Sad",
            "Disgusted", "Surprised", "Angry", "Fearful",
        ]

    def test_split_nv_table_order(self):
        manifest = DatasetManifest(
            (record("u1", "s1"),), {"u1": "train"}
        )
        stats = compute_stats(manifest)
        header = format_split_nv_table(stats.splits).splitlines()[0]
        assert header.split()[5:] == [
            "Cough", "Sneeze", "Sigh", "Breath", "Laughter",
            "Sniff", "Snoring", "Throat", "Groan", "Grunt",
        ]

    def test_format_stats_smoke(self):
        manifest = synthetic_split_manifest()
        out = make_splits(manifest, SplitSpec(test_size=60, dev_size=41, seed=3))
        text = format_stats(compute_stats(out))
        assert "Breath" in text and "Neutral" in text and "train" in text
