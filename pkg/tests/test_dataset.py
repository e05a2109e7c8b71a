"""Dataset record IO, validation, statistics, and splits."""

from __future__ import annotations

import json

import pytest

from kgexplain.dataset import (
    ExplanationInstance,
    instance_from_dict,
    read_instances,
    split_dataset,
    validate,
    word_count_stats,
    write_instances,
)
from kgexplain.errors import DatasetError, KgExplainError

from helpers import worked_instance


class TestReadWrite:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        assert read_instances(path) == []

    def test_round_trip_values(self, tmp_path):
        path = tmp_path / "data.jsonl"
        original = [worked_instance(), worked_instance(question="another question?", label_matched=True)]
        write_instances(path, original)
        assert read_instances(path) == original

    def test_round_trip_bytewise(self, tmp_path):
        first = tmp_path / "a.jsonl"
        second = tmp_path / "b.jsonl"
        write_instances(first, [worked_instance()])
        write_instances(second, read_instances(first))
        assert first.read_bytes() == second.read_bytes()

    def test_label_matched_inconsistency_rejected_on_strict_read(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        bad = worked_instance(predicted_label="negligence")  # label stays unfeeling but matched=True
        path.write_text(bad.to_json() + "\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="label_matched"):
            read_instances(path)
        assert len(read_instances(path, strict=False)) == 1

    def test_missing_field_reports_line_and_field(self, tmp_path):
        doc = worked_instance().to_json_dict()
        del doc["topk"]
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(doc) + "\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="line 1.*topk"):
            read_instances(path)

    def test_wrong_type_rejected(self, tmp_path):
        doc = worked_instance().to_json_dict()
        doc["label_matched"] = "yes"
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(doc) + "\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="label_matched"):
            read_instances(path)

    def test_unknown_field_rejected(self):
        doc = worked_instance().to_json_dict()
        doc["surprise"] = 1
        with pytest.raises(DatasetError, match="surprise"):
            instance_from_dict(doc)

    def test_optional_id_preserved(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_instances(path, [worked_instance(instance_id="q-123")])
        loaded = read_instances(path)
        assert loaded[0].instance_id == "q-123"
        assert loaded[0].question_id() == "q-123"


class TestValidate:
    def test_valid_fixture(self):
        assert validate(worked_instance()) == []

    def test_topk_mismatch(self):
        bad = worked_instance(topk=["a", "b", "c", "d", "e"])
        assert "topk_mismatch" in validate(bad)

    def test_concept_count(self):
        inst = worked_instance()
        short = worked_instance(concept=inst.concept[:49], topk=inst.concept[:5])
        assert validate(short) == ["concept_count"]

    def test_label_not_in_answers(self):
        assert "label_not_in_answers" in validate(worked_instance(label="not an option", label_matched=False))

    def test_label_matched_consistency(self):
        assert "label_matched_inconsistent" in validate(worked_instance(label_matched=False))

    def test_unparseable_debugger_score(self):
        assert "debugger_score_unparseable" in validate(worked_instance(debugger_score="n/a"))

    def test_multiple_violations_aggregate(self):
        bad = worked_instance(
            label="nope", label_matched=False, topk=["x"] * 5, debugger_score="??"
        )
        violations = validate(bad)
        assert {"label_not_in_answers", "topk_mismatch", "debugger_score_unparseable"} <= set(violations)


class TestWordCountStats:
    def test_hand_counted_single_instance(self):
        inst = worked_instance(explanation_why="a b c", explanation_why_not="d e")
        stats = word_count_stats([inst])
        assert stats.overall.mean_why == pytest.approx(3.0)
        assert stats.overall.mean_why_not == pytest.approx(2.0)
        assert stats.overall.mean_whole == pytest.approx(5.0)

    def test_mean_idempotent_over_duplicates(self):
        inst = worked_instance(explanation_why="one two", explanation_why_not="three")
        one = word_count_stats([inst])
        two = word_count_stats([inst, inst])
        assert one.overall.mean_why == two.overall.mean_why
        assert one.overall.mean_whole == two.overall.mean_whole

    def test_permutation_invariant(self):
        a = worked_instance(explanation_why="x " * 10, explanation_why_not="y")
        b = worked_instance(explanation_why="z", explanation_why_not="w " * 4)
        fwd = word_count_stats([a, b])
        rev = word_count_stats([b, a])
        assert fwd.overall == rev.overall

    def test_per_split_means(self):
        a = worked_instance(explanation_why="a b", explanation_why_not="c")
        b = worked_instance(explanation_why="d e f g", explanation_why_not="h i")
        stats = word_count_stats([a, b], splits={"train": [a], "dev": [b]})
        assert stats.per_split["train"].mean_why == pytest.approx(2.0)
        assert stats.per_split["dev"].mean_why == pytest.approx(4.0)

    def test_empty_dataset_rejected(self):
        with pytest.raises(KgExplainError):
            word_count_stats([])


class TestSplitDataset:
    def test_explicit_manifest_partition(self):
        a = worked_instance(instance_id="q1")
        b = worked_instance(instance_id="q2", question="other?")
        c = worked_instance(instance_id="q3", question="third?")
        splits = split_dataset([a, b, c], {"q1": "train", "q2": "dev", "q3": "test"})
        assert splits["train"] == [a]
        assert splits["dev"] == [b]
        assert splits["test"] == [c]

    def test_counts_are_exhaustive(self):
        instances = [worked_instance(instance_id=f"q{i}") for i in range(6)]
        manifest = {f"q{i}": ("train" if i % 2 == 0 else "test") for i in range(6)}
        splits = split_dataset(instances, manifest)
        assert sum(len(v) for v in splits.values()) == 6

    def test_empty_manifest_errors(self):
        with pytest.raises(DatasetError):
            split_dataset([worked_instance()], {})

    def test_hash_identity_used_without_explicit_id(self):
        inst = worked_instance()
        qid = inst.question_id()
        splits = split_dataset([inst], {qid: "dev"})
        assert splits["dev"] == [inst]

    def test_unknown_split_name_rejected(self):
        inst = worked_instance(instance_id="q1")
        with pytest.raises(DatasetError):
            split_dataset([inst], {"q1": "validation"})
