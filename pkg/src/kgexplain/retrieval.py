"""Retrieval of grounded demonstrations: exact cosine search over stored
embeddings, weighted debugger-score explanation selection, and in-context
prompt assembly."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .dataset import ExplanationInstance
from .debugger import DebuggerScore, parse_scores
from .errors import KgExplainError
from .pruning import QAContext

INDEX_FORMAT = "embedding-index"
INDEX_VERSION = 1


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two nonzero vectors of equal dimension."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise KgExplainError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise KgExplainError("cosine similarity of a zero vector is undefined")
    return float(u @ v) / (nu * nv)


class RetrievalIndex:
    """Exact (non-approximate) cosine index over instance embeddings.

    Immutable once built; unit-normalized copies of all vectors are cached
    so queries reduce to one matrix-vector product.
    """

    def __init__(self, ids: list[str], vectors: np.ndarray, model_id: str = "unknown"):
        if len(ids) != vectors.shape[0]:
            raise KgExplainError("ids and vectors disagree in length")
        if len(set(ids)) != len(ids):
            raise KgExplainError("duplicate instance ids in index")
        norms = np.linalg.norm(vectors, axis=1)
        if vectors.size and not np.all(norms > 0):
            raise KgExplainError("index contains a zero vector")
        self.ids = list(ids)
        self.vectors = np.asarray(vectors, dtype=np.float64)
        self.model_id = model_id
        self._unit = self.vectors / norms[:, None] if vectors.size else self.vectors

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.ids)

    def top_m(self, query: np.ndarray, m: int) -> list[tuple[str, float]]:
        """The ``m`` most similar entries, ties broken by instance id."""
        if m < 1:
            raise KgExplainError("m must be >= 1")
        if len(self.ids) == 0:
            raise KgExplainError("index is empty")
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dimension,):
            raise KgExplainError(f"query dimension {query.shape} does not match index ({self.dimension})")
        qn = float(np.linalg.norm(query))
        if qn == 0.0:
            raise KgExplainError("query embedding is a zero vector")
        scores = self._unit @ (query / qn)
        order = np.lexsort((np.asarray(self.ids), -scores))
        keep = order[: min(m, len(self.ids))]
        return [(self.ids[i], float(scores[i])) for i in keep]

    def save(self, path: str | os.PathLike) -> None:
        path = os.fspath(path)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            header = {
                "format": INDEX_FORMAT,
                "version": INDEX_VERSION,
                "dimension": self.dimension,
                "model_id": self.model_id,
                "count": len(self.ids),
            }
            fh.write(json.dumps(header) + "\n")
            for i, entry_id in enumerate(self.ids):
                fh.write(json.dumps({"id": entry_id, "vector": self.vectors[i].tolist()}) + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RetrievalIndex":
        path = os.fspath(path)
        with open(path, encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("format") != INDEX_FORMAT:
                raise KgExplainError(f"{path}: not an {INDEX_FORMAT} file")
            if header.get("version") != INDEX_VERSION:
                raise KgExplainError(f"{path}: unsupported index version")
            ids: list[str] = []
            rows: list[list[float]] = []
            for _ in range(header["count"]):
                entry = json.loads(fh.readline())
                ids.append(entry["id"])
                rows.append(entry["vector"])
        vectors = np.asarray(rows, dtype=np.float64).reshape(len(ids), header["dimension"])
        return cls(ids, vectors, model_id=header.get("model_id", "unknown"))


@dataclass
class SelectionWeights:
    """User preference weights over the debugger-score dimensions.

    The overall dimension is derived from the other three, so it defaults to
    zero weight to avoid double counting.
    """

    faithfulness: float = 1.0
    completeness: float = 1.0
    accuracy: float = 1.0
    overall: float = 0.0

    def __post_init__(self) -> None:
        for name in ("faithfulness", "completeness", "accuracy", "overall"):
            if getattr(self, name) < 0:
                raise KgExplainError(f"weight {name} must be non-negative")

    @property
    def is_zero(self) -> bool:
        return self.faithfulness == self.completeness == self.accuracy == self.overall == 0.0

    def value(self, score: DebuggerScore) -> float:
        return (
            self.faithfulness * score.faithfulness
            + self.completeness * score.completeness
            + self.accuracy * score.accuracy
            + self.overall * score.overall
        )


def select_explanation(candidates: list[tuple[str, DebuggerScore]], weights: SelectionWeights) -> str:
    """Id of the candidate maximizing the weighted debugger-score sum.

    Ties are broken toward the lexicographically smallest explanation id.
    """
    if not candidates:
        raise KgExplainError("no candidate explanations to select from")
    if weights.is_zero:
        raise KgExplainError("at least one selection weight must be positive")
    best_id, _ = min(candidates, key=lambda pair: (-weights.value(pair[1]), pair[0]))
    return best_id


@dataclass
class Demo:
    """One retrieved demonstration: rank, similarity, and chosen explanation."""

    rank: int
    score: float
    instance: ExplanationInstance
    explanation_id: str


class DemoRetriever:
    """Retrieves top-m instances and picks each one's best explanation.

    Records sharing a question id are treated as alternative explanations of
    the same instance; the index holds one entry per instance.
    """

    def __init__(
        self,
        records: list[ExplanationInstance],
        model_id: str = "stored",
        index: RetrievalIndex | None = None,
    ):
        if not records:
            raise KgExplainError("retrieval corpus is empty")
        self.groups: dict[str, list[tuple[str, ExplanationInstance]]] = {}
        ids: list[str] = []
        rows: list[list[float]] = []
        for record in records:
            qid = record.question_id()
            if qid not in self.groups:
                self.groups[qid] = []
                ids.append(qid)
                rows.append([float(x) for x in record.embedding])
            self.groups[qid].append((f"{qid}:{len(self.groups[qid])}", record))
        if index is not None:
            if set(index.ids) != set(ids):
                raise KgExplainError("index ids do not match the dataset's question ids")
            self.index = index
        else:
            dim = len(rows[0])
            if any(len(r) != dim for r in rows):
                raise KgExplainError("records carry embeddings of mixed dimensions")
            self.index = RetrievalIndex(ids, np.asarray(rows, dtype=np.float64), model_id=model_id)

    @classmethod
    def build_index(cls, records: list[ExplanationInstance], model_id: str = "stored") -> RetrievalIndex:
        """Standalone index over one entry per question id, from stored embeddings."""
        return cls(records, model_id=model_id).index

    def retrieve(self, query_embedding: np.ndarray, m: int, weights: SelectionWeights) -> list[Demo]:
        demos: list[Demo] = []
        for rank, (qid, score) in enumerate(self.index.top_m(query_embedding, m), start=1):
            candidates = [(eid, parse_scores(rec.debugger_score)) for eid, rec in self.groups[qid]]
            chosen = select_explanation(candidates, weights)
            record = dict(self.groups[qid])[chosen]
            demos.append(Demo(rank=rank, score=score, instance=record, explanation_id=chosen))
        return demos


def build_icl_prompt(query: QAContext, demos: list[Demo]) -> str:
    """In-context prompt: demos in retrieval-rank order, then the new query
    with the why/why-not instruction."""
    if not demos:
        raise KgExplainError("need at least one demonstration")
    blocks = []
    for demo in sorted(demos, key=lambda d: d.rank):
        inst = demo.instance
        blocks.append(
            f"Example {demo.rank}:\n"
            f"Question: {inst.question}\n"
            f"Options: {', '.join(inst.answers)}\n"
            f"Answer: {inst.predicted_label}\n"
            f"Why: {inst.explanation_why}\n"
            f"Why not: {inst.explanation_why_not}"
        )
    header = (
        "You will explain a language model's answer choice, grounded in the "
        "reasoning of similar solved examples.\n\n"
    )
    tail = (
        "New case:\n"
        f"Question: {query.question}\n"
        f"Options: {', '.join(query.options)}\n"
        "Explain the LM's reasoning process for selecting its answer over the other "
        "options, in the style of the examples: first a why-choose explanation, then a "
        "why-not-choose explanation for the remaining options. Your response should be "
        "short and concise."
    )
    return header + "\n\n".join(blocks) + "\n\n" + tail
