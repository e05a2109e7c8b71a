"""QA-conditioned subgraph pruning: relevance scoring and top-N node selection.

Each candidate node in the hop-bounded neighborhood of the grounded seed
entities is scored for relevance to the question/answer pair; the highest
scoring N nodes are retained together with their induced edges.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import ConfigurationError, KgExplainError, NoSeedEntities, NumericalError
from .kg import Edge, KnowledgeGraph, build_label_index, ground_entities, neighborhood

ELEMENT_GRAPH_VERSION = 1

# Node roles assigned when the source KG carries no type information of its
# own: 0 = other, 1 = mentioned in the question, 2 = mentioned in an option.
ROLE_TYPE_NAMES = ["other", "question-entity", "option-entity"]


@dataclass
class QAContext:
    """A question, its ordered answer options, and a pooled LM representation."""

    question: str
    options: list[str]
    context_embedding: np.ndarray

    def __post_init__(self) -> None:
        if len(self.options) < 2:
            raise ConfigurationError("a QA context needs at least 2 options")
        if len(set(self.options)) != len(self.options):
            raise ConfigurationError("options must be unique")
        self.context_embedding = np.asarray(self.context_embedding, dtype=np.float64)
        if not np.all(np.isfinite(self.context_embedding)):
            raise NumericalError("context embedding contains non-finite values")

    def joined_text(self) -> str:
        return self.question + " " + " ".join(self.options)


@dataclass
class ElementGraph:
    """The pruned subgraph retained for reasoning, with per-node relevance."""

    labels: list[str]
    node_types: list[int]
    edges: list[Edge]
    relevance: list[float]
    kg_node_ids: list[int]
    node_type_count: int
    relation_type_count: int
    node_type_names: list[str] = field(default_factory=list)
    relation_type_names: list[str] = field(default_factory=list)

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def check_invariants(self, budget: int | None = None) -> None:
        n = self.node_count
        if budget is not None and n > budget:
            raise KgExplainError(f"{n} nodes exceed the prune budget {budget}")
        if not all(0.0 < s < 1.0 for s in self.relevance):
            raise KgExplainError("relevance scores must lie strictly in (0,1)")
        for e in self.edges:
            if not (0 <= e.src < n and 0 <= e.dst < n):
                raise KgExplainError(f"edge endpoint out of range: {e}")

    def to_json(self) -> str:
        doc = {
            "version": ELEMENT_GRAPH_VERSION,
            "nodes": [
                {
                    "id": i,
                    "label": self.labels[i],
                    "type": self.node_types[i],
                    "score": self.relevance[i],
                    "kg_id": self.kg_node_ids[i],
                }
                for i in range(self.node_count)
            ],
            "edges": [[e.src, e.dst, e.rel] for e in self.edges],
            "node_type_count": self.node_type_count,
            "relation_type_count": self.relation_type_count,
            "node_type_names": self.node_type_names,
            "relation_type_names": self.relation_type_names,
        }
        return json.dumps(doc, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "ElementGraph":
        doc = json.loads(text)
        if doc.get("version") != ELEMENT_GRAPH_VERSION:
            raise KgExplainError(f"unsupported element-graph version {doc.get('version')}")
        nodes = doc["nodes"]
        return cls(
            labels=[n["label"] for n in nodes],
            node_types=[n["type"] for n in nodes],
            edges=[Edge(s, d, r) for s, d, r in doc["edges"]],
            relevance=[n["score"] for n in nodes],
            kg_node_ids=[n["kg_id"] for n in nodes],
            node_type_count=doc["node_type_count"],
            relation_type_count=doc["relation_type_count"],
            node_type_names=doc.get("node_type_names", []),
            relation_type_names=doc.get("relation_type_names", []),
        )

    def save(self, path: str | os.PathLike) -> None:
        path = os.fspath(path)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ElementGraph":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


class RelevanceScorer(Protocol):
    """Encoder plus score head mapping (node label, QA text) to a logit."""

    def encode(self, text: str) -> np.ndarray: ...

    def score_head(self, encoded: np.ndarray) -> float: ...


class HashScorer:
    """Deterministic offline scorer: digest-derived features, fixed score head.

    Stands in for the fine-tuned LM encoder; stable across runs and
    platforms because it is built on sha256 of the input text.
    """

    FEATURES = 8

    def __init__(self, seed: int = 0):
        self.seed = seed

    def encode(self, text: str) -> np.ndarray:
        digest = hashlib.sha256(f"{self.seed}\x1f{text}".encode("utf-8")).digest()
        raw = np.frombuffer(digest[: 2 * self.FEATURES], dtype=np.uint16).astype(np.float64)
        return raw / 32767.5 - 1.0

    def score_head(self, encoded: np.ndarray) -> float:
        return float(np.mean(encoded) * 4.0)


class EmbeddingScorer:
    """Scores nodes with an external embedding model and a seeded linear head."""

    def __init__(self, embedder, seed: int = 0):
        self.embedder = embedder
        self.seed = seed
        self._head: np.ndarray | None = None

    def encode(self, text: str) -> np.ndarray:
        return np.asarray(self.embedder.embed(text), dtype=np.float64)

    def score_head(self, encoded: np.ndarray) -> float:
        if self._head is None or self._head.shape[0] != encoded.shape[0]:
            rng = np.random.default_rng(self.seed)
            self._head = rng.standard_normal(encoded.shape[0]) / math.sqrt(encoded.shape[0])
        return float(self._head @ encoded)


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def encoding_text(label: str, qa: QAContext) -> str:
    """Concatenation fed to the encoder: label, question, joined options."""
    return label + " " + qa.joined_text()


def score_node(node: int, qa: QAContext, scorer: RelevanceScorer, graph: KnowledgeGraph) -> float:
    """Relevance of one node: sigmoid of the score head over the encoding."""
    label = graph.labels[node]
    logit = scorer.score_head(scorer.encode(encoding_text(label, qa)))
    if not math.isfinite(logit):
        raise NumericalError(f"non-finite relevance logit for node {node}")
    return sigmoid(logit)


def _role_types(graph: KnowledgeGraph, qa: QAContext, node_ids: list[int]) -> tuple[list[int], list[str]]:
    """Assign question/option/other roles when the KG has only a trivial type."""
    index = build_label_index(graph)
    q_nodes = ground_entities(qa.question, graph, index)
    opt_nodes: set[int] = set()
    for opt in qa.options:
        opt_nodes |= ground_entities(opt, graph, index)
    types = []
    for nid in node_ids:
        if nid in opt_nodes:
            types.append(2)
        elif nid in q_nodes:
            types.append(1)
        else:
            types.append(0)
    return types, list(ROLE_TYPE_NAMES)


def prune_kg(
    qa: QAContext,
    graph: KnowledgeGraph,
    scorer: RelevanceScorer,
    n: int = 200,
    hops: int = 2,
) -> ElementGraph:
    """Retain the top-``n`` candidate nodes by relevance, with induced edges.

    Candidates come from the ``hops``-bounded neighborhood of the entities
    grounded in the QA text. Ties are broken toward lower node id so the
    result is fully deterministic.
    """
    if n < 1:
        raise KgExplainError("prune budget must be >= 1")
    seeds = ground_entities(qa.joined_text(), graph)
    if not seeds:
        raise NoSeedEntities("no KG entities found in the question/answer text")
    hood = neighborhood(graph, seeds, hops)

    candidates = sorted(hood.node_ids)
    scores = {nid: score_node(nid, qa, scorer, graph) for nid in candidates}
    ranked = sorted(candidates, key=lambda nid: (-scores[nid], nid))
    retained = sorted(ranked[:n])

    local = {kg_id: i for i, kg_id in enumerate(retained)}
    member = set(retained)
    edges = [
        Edge(local[e.src], local[e.dst], e.rel)
        for e in hood.edges
        if e.src in member and e.dst in member
    ]

    if graph.node_type_count <= 1:
        node_types, type_names = _role_types(graph, qa, retained)
        type_count = len(type_names)
    else:
        node_types = [graph.node_types[nid] for nid in retained]
        type_names = list(graph.node_type_names)
        type_count = graph.node_type_count

    eg = ElementGraph(
        labels=[graph.labels[nid] for nid in retained],
        node_types=node_types,
        edges=edges,
        relevance=[scores[nid] for nid in retained],
        kg_node_ids=retained,
        node_type_count=type_count,
        relation_type_count=graph.relation_type_count,
        node_type_names=type_names,
        relation_type_names=list(graph.relation_type_names),
    )
    eg.check_invariants(budget=n)
    return eg
