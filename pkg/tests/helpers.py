"""Shared builders for test fixtures: small graphs, toy models, mock records."""

from __future__ import annotations

import numpy as np

from kgexplain.dataset import ExplanationInstance
from kgexplain.gat import GatConfig, Example, init_params
from kgexplain.kg import Edge, KnowledgeGraph
from kgexplain.pruning import ElementGraph, QAContext

WORKED_QUESTION = (
    "John carred for Lucy but had trouble expressing it.  Lucy was disturbed by "
    "John's inability to express affection and felt that he was what?"
)
WORKED_ANSWERS = ["being mean", "negligence", "disinterest", "misunderstood", "unfeeling"]
WORKED_TOPK = ["enraged", "delay", "abiogenesis", "sneerer", "helpable"]
WORKED_SCORE_LINE = "Faithfulness: 4 | Completeness: 3 | Accuracy: 4"


def worked_instance(**overrides) -> ExplanationInstance:
    """A fully valid record shaped like the dataset's worked example."""
    concept = WORKED_TOPK + ["begrudge", "mollify"] + [f"filler_{i:02d}" for i in range(43)]
    fields = dict(
        question=WORKED_QUESTION,
        answers=list(WORKED_ANSWERS),
        label="unfeeling",
        predicted_label="unfeeling",
        label_matched=True,
        concept=concept,
        topk=list(WORKED_TOPK),
        explanation_why=(
            "The model tied the emotional descriptors in the scenario to the ranked "
            "reason-elements and read the lack of expressed affection as an absence "
            "of feeling."
        ),
        explanation_why_not=(
            "The other options describe intent, neglect, or confusion, none of which "
            "the reason-elements support as strongly as a perceived absence of emotion."
        ),
        debugger_score=WORKED_SCORE_LINE,
        embedding=[0.1, -0.2, 0.3, 0.4],
    )
    fields.update(overrides)
    return ExplanationInstance(**fields)


def chain_graph(labels: list[str], relation: str = "linked") -> KnowledgeGraph:
    """A path graph over the given labels: labels[0] - labels[1] - ..."""
    edges = [Edge(i, i + 1, 0) for i in range(len(labels) - 1)]
    return KnowledgeGraph(
        labels=list(labels),
        node_types=[0] * len(labels),
        edges=edges,
        node_type_names=["entity"],
        relation_type_names=[relation],
    )


def random_graph(rng: np.random.Generator, n: int, edge_factor: float = 2.0, relations: int = 3) -> KnowledgeGraph:
    labels = [f"node_{i}" for i in range(n)]
    edges = []
    seen = set()
    for _ in range(int(n * edge_factor)):
        a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
        rel = int(rng.integers(0, relations))
        if a != b and (a, b, rel) not in seen:
            seen.add((a, b, rel))
            edges.append(Edge(a, b, rel))
    return KnowledgeGraph(
        labels=labels,
        node_types=[0] * n,
        edges=edges,
        node_type_names=["entity"],
        relation_type_names=[f"rel_{r}" for r in range(relations)],
    )


def random_element_graph(
    rng: np.random.Generator,
    n: int,
    node_types: int = 3,
    relations: int = 4,
    edge_factor: float = 2.0,
) -> ElementGraph:
    edges = []
    seen = set()
    for _ in range(int(n * edge_factor)):
        a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
        if a != b and (a, b) not in seen and (b, a) not in seen:
            seen.add((a, b))
            edges.append(Edge(a, b, int(rng.integers(0, relations))))
    return ElementGraph(
        labels=[f"n{i}" for i in range(n)],
        node_types=[int(rng.integers(0, node_types)) for _ in range(n)],
        edges=edges,
        relevance=[float(rng.uniform(0.05, 0.95)) for _ in range(n)],
        kg_node_ids=list(range(n)),
        node_type_count=node_types,
        relation_type_count=relations,
    )


def toy_config(**overrides) -> GatConfig:
    fields = dict(
        layers=2,
        hidden=12,
        message_dim=12,
        relation_dim=6,
        node_type_count=3,
        relation_type_count=4,
        lm_dim=6,
        option_count=4,
        answer_hidden=10,
        pool_size=16,
        dropout=0.0,
        seed=1,
    )
    fields.update(overrides)
    return GatConfig(**fields)


def toy_qa(rng: np.random.Generator, options: int = 4, lm_dim: int = 6) -> QAContext:
    return QAContext(
        question="toy question?",
        options=[f"option {i}" for i in range(options)],
        context_embedding=rng.normal(0.0, 1.0, lm_dim),
    )


def toy_example(seed: int, n: int = 8, config: GatConfig | None = None) -> Example:
    cfg = config or toy_config()
    rng = np.random.default_rng(seed)
    eg = random_element_graph(rng, n, node_types=cfg.node_type_count, relations=cfg.relation_type_count)
    qa = toy_qa(rng, options=cfg.option_count, lm_dim=cfg.lm_dim)
    return Example(qa=qa, graph=eg, gold=int(rng.integers(0, cfg.option_count)))


def toy_params(config: GatConfig | None = None):
    return init_params(config or toy_config())


PIPELINE_QUESTION = "what do cats usually chase around the garden?"
PIPELINE_OPTIONS = ["mice", "yarn", "cars", "dreams", "shadows"]


def pipeline_kg(extra: int = 120) -> KnowledgeGraph:
    """A KG whose 2-hop neighborhood around the grounded seeds exceeds 50 nodes."""
    labels = ["cat", "garden"] + list(PIPELINE_OPTIONS)
    edges = []
    rng = np.random.default_rng(99)
    for i in range(1, len(labels)):
        edges.append(Edge(0, i, int(rng.integers(0, 3))))
    for i in range(extra):
        labels.append(f"thing_{i:03d}")
        nid = len(labels) - 1
        anchor = int(rng.integers(0, 7))  # attach to a grounded node
        edges.append(Edge(anchor, nid, int(rng.integers(0, 3))))
        if i > 2 and rng.random() < 0.5:
            edges.append(Edge(nid, int(rng.integers(7, nid)), int(rng.integers(0, 3))))
    return KnowledgeGraph(
        labels=labels,
        node_types=[0] * len(labels),
        edges=edges,
        node_type_names=["entity"],
        relation_type_names=["related", "capable", "location"],
    )


def pipeline_gat_config(lm_dim: int = 32) -> GatConfig:
    return GatConfig(
        layers=2,
        hidden=16,
        message_dim=16,
        relation_dim=8,
        node_type_count=3,  # grounding roles assigned by the pruner
        relation_type_count=3,
        lm_dim=lm_dim,
        option_count=len(PIPELINE_OPTIONS),
        answer_hidden=16,
        pool_size=16,
        dropout=0.0,
        seed=5,
    )
