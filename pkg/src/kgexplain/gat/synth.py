"""Synthetic planted-signal task for end-to-end learning checks.

Every instance plants exactly one hub node whose node type identifies the
correct option; the rest of the graph is typed noise. A model that learns
the task must route attention mass onto the hub, so the signal should also
dominate the extracted reason elements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..kg import Edge
from ..pruning import ElementGraph, QAContext
from .model import GatConfig
from .training import Example

DISTRACTOR_TYPE_OFFSET = 0  # signal types occupy 0..options-1, distractors the rest


@dataclass
class PlantedDataset:
    train: list[Example]
    dev: list[Example]
    signal_labels: list[str]


def planted_config(num_options: int = 4, seed: int = 0) -> GatConfig:
    return GatConfig(
        layers=2,
        hidden=16,
        message_dim=16,
        relation_dim=8,
        node_type_count=num_options + 1,
        relation_type_count=3,
        lm_dim=8,
        option_count=num_options,
        answer_hidden=32,
        pool_size=16,
        dropout=0.1,
        seed=seed,
    )


def _make_instance(rng: np.random.Generator, gold: int, num_options: int, serial: int) -> Example:
    n = int(rng.integers(10, 15))
    distractor_type = num_options
    labels = [f"signal_{gold}"] + [f"noise_{serial}_{i}" for i in range(1, n)]
    node_types = [gold] + [distractor_type] * (n - 1)
    relevance = [float(rng.uniform(0.6, 0.9))] + [float(rng.uniform(0.1, 0.5)) for _ in range(n - 1)]

    edges: list[Edge] = []
    seen: set[tuple[int, int]] = set()

    def add(a: int, b: int) -> None:
        if a == b or (a, b) in seen or (b, a) in seen:
            return
        seen.add((a, b))
        edges.append(Edge(a, b, int(rng.integers(0, 3))))

    hub_degree = max(3, int(0.6 * (n - 1)))
    for d in rng.choice(np.arange(1, n), size=hub_degree, replace=False):
        add(0, int(d))
    for i in range(1, n):
        add(i, int(rng.integers(1, n)))

    graph = ElementGraph(
        labels=labels,
        node_types=node_types,
        edges=edges,
        relevance=relevance,
        kg_node_ids=list(range(n)),
        node_type_count=num_options + 1,
        relation_type_count=3,
    )
    qa = QAContext(
        question=f"synthetic case {serial}: which planted signal is present?",
        options=[f"option {i}" for i in range(num_options)],
        context_embedding=rng.normal(0.0, 0.1, size=8),
    )
    return Example(qa=qa, graph=graph, gold=gold)


def make_planted_dataset(
    num_train: int = 200,
    num_dev: int = 50,
    num_options: int = 4,
    seed: int = 0,
) -> PlantedDataset:
    rng = np.random.default_rng(seed)
    train = [
        _make_instance(rng, gold=int(rng.integers(0, num_options)), num_options=num_options, serial=i)
        for i in range(num_train)
    ]
    dev = [
        _make_instance(rng, gold=int(rng.integers(0, num_options)), num_options=num_options, serial=num_train + i)
        for i in range(num_dev)
    ]
    return PlantedDataset(
        train=train,
        dev=dev,
        signal_labels=[f"signal_{i}" for i in range(num_options)],
    )
