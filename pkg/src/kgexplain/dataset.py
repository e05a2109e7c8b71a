"""Explanation dataset records: line-delimited IO, validation, statistics, splits."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace

from .debugger import parse_scores
from .errors import DatasetError, KgExplainError, ScoreParseError

FIELD_ORDER = (
    "question",
    "answers",
    "label",
    "predicted_label",
    "label_matched",
    "concept",
    "topk",
    "explanation_why",
    "explanation_why_not",
    "debugger_score",
    "embedding",
)
CONCEPT_COUNT = 50
TOPK_COUNT = 5
SPLIT_NAMES = ("train", "dev", "test")


@dataclass
class ExplanationInstance:
    """One dataset record: QA pair, prediction, reason elements, explanations."""

    question: str
    answers: list[str]
    label: str
    predicted_label: str
    label_matched: bool
    concept: list[str]
    topk: list[str]
    explanation_why: str
    explanation_why_not: str
    debugger_score: str
    embedding: list[float]
    instance_id: str | None = None  # optional explicit id, serialized as "id"

    def question_id(self) -> str:
        """Split identity: the explicit id when present, else a text hash."""
        if self.instance_id:
            return self.instance_id
        normalized = " ".join(self.question.split()).lower()
        return hashlib.sha256(normalized.encode("utf-8")).hexdigest()[:16]

    def to_json_dict(self) -> dict:
        doc = {name: getattr(self, name) for name in FIELD_ORDER}
        if self.instance_id is not None:
            doc["id"] = self.instance_id
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), ensure_ascii=False)


_FIELD_TYPES: dict[str, type | tuple[type, ...]] = {
    "question": str,
    "answers": list,
    "label": str,
    "predicted_label": str,
    "label_matched": bool,
    "concept": list,
    "topk": list,
    "explanation_why": str,
    "explanation_why_not": str,
    "debugger_score": str,
    "embedding": list,
}


def instance_from_dict(doc: dict, line_no: int | None = None) -> ExplanationInstance:
    if not isinstance(doc, dict):
        raise DatasetError("record is not an object", line_no)
    for name, expected in _FIELD_TYPES.items():
        if name not in doc:
            raise DatasetError("missing field", line_no, name)
        if not isinstance(doc[name], expected) or (expected is not bool and isinstance(doc[name], bool)):
            raise DatasetError(f"expected {getattr(expected, '__name__', expected)}", line_no, name)
    for name in ("answers", "concept", "topk"):
        if not all(isinstance(x, str) for x in doc[name]):
            raise DatasetError("expected a list of strings", line_no, name)
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in doc["embedding"]):
        raise DatasetError("expected a list of numbers", line_no, "embedding")
    extra = set(doc) - set(FIELD_ORDER) - {"id"}
    if extra:
        raise DatasetError("unknown field", line_no, sorted(extra)[0])
    return ExplanationInstance(
        **{name: doc[name] for name in FIELD_ORDER},
        instance_id=doc.get("id"),
    )


def validate(instance: ExplanationInstance) -> list[str]:
    """All invariant violations of one record; an empty list means valid."""
    violations: list[str] = []
    if instance.label not in instance.answers:
        violations.append("label_not_in_answers")
    if instance.predicted_label not in instance.answers:
        violations.append("predicted_not_in_answers")
    if instance.label_matched != (instance.predicted_label == instance.label):
        violations.append("label_matched_inconsistent")
    if instance.topk != instance.concept[:TOPK_COUNT]:
        violations.append("topk_mismatch")
    if len(instance.concept) != CONCEPT_COUNT:
        violations.append("concept_count")
    try:
        parse_scores(instance.debugger_score)
    except ScoreParseError:
        violations.append("debugger_score_unparseable")
    if not instance.explanation_why.strip():
        violations.append("empty_explanation_why")
    if not instance.explanation_why_not.strip():
        violations.append("empty_explanation_why_not")
    return violations


# Invariants enforced on strict reads; concept_count is reported by validate()
# but tolerated on read because element graphs smaller than 50 nodes are legal.
_STRICT_VIOLATIONS = {
    "label_not_in_answers": "label",
    "predicted_not_in_answers": "predicted_label",
    "label_matched_inconsistent": "label_matched",
    "topk_mismatch": "topk",
    "debugger_score_unparseable": "debugger_score",
}


def read_instances(path: str | os.PathLike, strict: bool = True) -> list[ExplanationInstance]:
    """Read line-delimited records; with ``strict`` the core invariants are enforced."""
    path = os.fspath(path)
    out: list[ExplanationInstance] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON: {exc}", line_no) from exc
            instance = instance_from_dict(doc, line_no)
            if strict:
                for violation in validate(instance):
                    if violation in _STRICT_VIOLATIONS:
                        raise DatasetError(f"invariant violated: {violation}", line_no, _STRICT_VIOLATIONS[violation])
            out.append(instance)
    return out


def write_instances(path: str | os.PathLike, instances: list[ExplanationInstance]) -> None:
    """Write one JSON record per line, atomically (write + rename)."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for instance in instances:
            fh.write(instance.to_json() + "\n")
    os.replace(tmp, path)


@dataclass
class SplitStats:
    count: int
    mean_why: float
    mean_why_not: float
    mean_whole: float


@dataclass
class DatasetStats:
    overall: SplitStats
    per_split: dict[str, SplitStats] = field(default_factory=dict)


def _word_count(text: str) -> int:
    return len(text.split())


def _split_stats(instances: list[ExplanationInstance]) -> SplitStats:
    n = len(instances)
    why = sum(_word_count(i.explanation_why) for i in instances)
    why_not = sum(_word_count(i.explanation_why_not) for i in instances)
    whole = sum(_word_count(i.explanation_why + " " + i.explanation_why_not) for i in instances)
    return SplitStats(count=n, mean_why=why / n, mean_why_not=why_not / n, mean_whole=whole / n)


def word_count_stats(
    instances: list[ExplanationInstance],
    splits: dict[str, list[ExplanationInstance]] | None = None,
) -> DatasetStats:
    """Average word counts of the why / why-not / whole explanation texts.

    A word is a maximal whitespace-delimited token; the whole-explanation
    count is taken on the two texts joined by a single space.
    """
    if not instances:
        raise KgExplainError("cannot compute statistics of an empty dataset")
    stats = DatasetStats(overall=_split_stats(instances))
    if splits:
        for name, subset in splits.items():
            if subset:
                stats.per_split[name] = _split_stats(subset)
    return stats


def split_dataset(
    instances: list[ExplanationInstance],
    manifest: dict[str, str],
) -> dict[str, list[ExplanationInstance]]:
    """Partition records by the manifest's question-id -> split mapping."""
    out: dict[str, list[ExplanationInstance]] = {name: [] for name in SPLIT_NAMES}
    for instance in instances:
        qid = instance.question_id()
        split = manifest.get(qid)
        if split is None:
            raise DatasetError(f"question id {qid!r} is not in the split manifest")
        if split not in out:
            raise DatasetError(f"unknown split name {split!r} for question id {qid!r}")
        out[split].append(instance)
    return out


def with_refined_explanations(
    instance: ExplanationInstance, why: str, why_not: str, debugger_score: str | None = None
) -> ExplanationInstance:
    return replace(
        instance,
        explanation_why=why,
        explanation_why_not=why_not,
        debugger_score=debugger_score if debugger_score is not None else instance.debugger_score,
    )
