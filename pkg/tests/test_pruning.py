"""Subgraph pruning: relevance scoring and top-N selection vs. brute force."""

from __future__ import annotations

import hashlib
import math

import numpy as np
import pytest

from kgexplain.errors import KgExplainError, NoSeedEntities
from kgexplain.kg import Edge, KnowledgeGraph, ground_entities, neighborhood
from kgexplain.pruning import (
    ElementGraph,
    HashScorer,
    QAContext,
    encoding_text,
    prune_kg,
    score_node,
    sigmoid,
)

from helpers import random_graph


class ConstantScorer:
    def __init__(self, logit: float = 0.0):
        self.logit = logit

    def encode(self, text: str) -> np.ndarray:
        return np.zeros(1)

    def score_head(self, encoded: np.ndarray) -> float:
        return self.logit


class MappedScorer:
    """Looks the logit up by the node label prefix of the encoded text."""

    def __init__(self, logits: dict[str, float]):
        self.logits = logits

    def encode(self, text: str) -> np.ndarray:
        label = next(l for l in sorted(self.logits, key=len, reverse=True) if text.startswith(l))
        return np.array([self.logits[label]])

    def score_head(self, encoded: np.ndarray) -> float:
        return float(encoded[0])


def qa(question: str = "which label fits", options: tuple[str, ...] = ("yes", "no")) -> QAContext:
    return QAContext(question=question, options=list(options), context_embedding=np.zeros(4))


def labeled_graph(labels: list[str], edges: list[tuple[int, int]]) -> KnowledgeGraph:
    return KnowledgeGraph(
        labels=labels,
        node_types=[0] * len(labels),
        edges=[Edge(a, b, 0) for a, b in edges],
        node_type_names=["entity"],
        relation_type_names=["linked"],
    )


def prune_oracle(graph, qa_ctx, scorer, n, hops):
    """Brute force: score every candidate, full sort, take N, same tie-break."""
    seeds = ground_entities(qa_ctx.joined_text(), graph)
    pool = sorted(neighborhood(graph, seeds, hops).node_ids)
    scores = {nid: score_node(nid, qa_ctx, scorer, graph) for nid in pool}
    ranked = sorted(pool, key=lambda nid: (-scores[nid], nid))
    return set(ranked[:n]), scores


class TestScoreNode:
    def test_zero_logit_gives_half(self):
        graph = labeled_graph(["anything"], [])
        assert score_node(0, qa(), ConstantScorer(0.0), graph) == 0.5

    def test_constant_scorer_equal_scores(self):
        labels = [f"label{i}" for i in range(6)]
        graph = labeled_graph(labels, [])
        scores = {score_node(i, qa(), ConstantScorer(1.3), graph) for i in range(6)}
        assert len(scores) == 1

    def test_scores_strictly_inside_unit_interval(self):
        graph = labeled_graph(["x"], [])
        for logit in (-30.0, -1.0, 0.0, 2.5, 30.0):
            s = score_node(0, qa(), ConstantScorer(logit), graph)
            assert 0.0 < s < 1.0

    def test_hash_scorer_ordering_matches_reimplementation(self):
        labels = [f"word{i}" for i in range(5)]
        graph = labeled_graph(labels, [])
        context = qa()
        scorer = HashScorer(seed=3)
        ours = {i: score_node(i, context, scorer, graph) for i in range(5)}

        # independent recomputation: sha256 -> uint16 features -> mean*4 -> sigmoid
        def oracle(label: str) -> float:
            text = encoding_text(label, context)
            digest = hashlib.sha256(f"3\x1f{text}".encode()).digest()
            feats = [int.from_bytes(digest[2 * k : 2 * k + 2], "little") / 32767.5 - 1.0 for k in range(8)]
            logit = sum(feats) / len(feats) * 4.0
            return 1.0 / (1.0 + math.exp(-logit))

        expected = {i: oracle(labels[i]) for i in range(5)}
        assert ours == pytest.approx(expected)
        ours_order = sorted(range(5), key=lambda i: -ours[i])
        oracle_order = sorted(range(5), key=lambda i: -expected[i])
        assert ours_order == oracle_order


class TestPruneKg:
    def test_budget_covers_whole_pool(self):
        graph = labeled_graph(["seed", "other", "third"], [(0, 1), (1, 2)])
        eg = prune_kg(qa("the seed"), graph, ConstantScorer(), n=50, hops=2)
        assert eg.node_count == 3

    def test_five_node_pool_top3(self):
        # star around the grounded seed so every node is one hop away
        labels = ["seed", "a", "b", "c", "d"]
        graph = labeled_graph(labels, [(0, 1), (0, 2), (0, 3), (0, 4)])
        logits = {"seed": 2.197, "a": 0.847, "b": 0.405, "c": -1.386, "d": -2.197}
        scorer = MappedScorer(logits)
        context = qa("the seed")
        eg = prune_kg(context, graph, scorer, n=3, hops=1)
        assert set(eg.labels) == {"seed", "a", "b"}
        expected, scores = prune_oracle(graph, context, scorer, 3, 1)
        assert set(eg.kg_node_ids) == expected
        assert eg.relevance == [pytest.approx(scores[nid]) for nid in eg.kg_node_ids]

    def test_induced_edges_preserved(self):
        labels = ["seed", "a", "b"]
        graph = labeled_graph(labels, [(0, 1), (1, 2), (0, 2)])
        eg = prune_kg(qa("the seed"), graph, ConstantScorer(), n=2, hops=2)
        # ties broken toward lower ids: nodes 0 and 1 survive, edge (0,1) kept
        assert eg.kg_node_ids == [0, 1]
        assert [(e.src, e.dst) for e in eg.edges] == [(0, 1)]

    def test_no_seed_entities(self):
        graph = labeled_graph(["unrelated"], [])
        with pytest.raises(NoSeedEntities):
            prune_kg(qa("nothing matches here"), graph, ConstantScorer(), n=3, hops=2)

    def test_budget_must_be_positive(self):
        graph = labeled_graph(["seed"], [])
        with pytest.raises(KgExplainError):
            prune_kg(qa("the seed"), graph, ConstantScorer(), n=0, hops=2)

    def test_retained_count(self):
        graph = labeled_graph(["seed", "a", "b", "c"], [(0, 1), (0, 2), (0, 3)])
        for n in (1, 2, 3, 4, 9):
            eg = prune_kg(qa("the seed"), graph, HashScorer(), n=n, hops=1)
            assert eg.node_count == min(n, 4)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_brute_force_oracle(self, seed):
        rng = np.random.default_rng(seed)
        graph = random_graph(rng, n=int(rng.integers(10, 120)))
        context = qa(f"start from node_{int(rng.integers(0, graph.node_count))}")
        n = int(rng.integers(1, 40))
        hops = int(rng.integers(1, 3))
        eg = prune_kg(context, graph, HashScorer(seed=seed), n=n, hops=hops)
        expected, scores = prune_oracle(graph, context, HashScorer(seed=seed), n, hops)
        assert set(eg.kg_node_ids) == expected
        if expected and len(expected) < len(scores):
            retained_min = min(scores[nid] for nid in expected)
            discarded_max = max(scores[nid] for nid in scores if nid not in expected)
            assert retained_min >= discarded_max

    def test_deterministic_serialization(self):
        rng = np.random.default_rng(5)
        graph = random_graph(rng, n=40)
        context = qa("start from node_7")
        a = prune_kg(context, graph, HashScorer(seed=1), n=10, hops=2)
        b = prune_kg(context, graph, HashScorer(seed=1), n=10, hops=2)
        assert a.to_json() == b.to_json()

    def test_grounding_roles_assigned_on_untyped_graphs(self):
        graph = labeled_graph(["seed", "yes", "other"], [(0, 1), (0, 2)])
        context = qa("the seed", options=("yes", "no"))
        eg = prune_kg(context, graph, ConstantScorer(), n=5, hops=1)
        roles = dict(zip(eg.labels, eg.node_types))
        assert roles["seed"] == 1  # question entity
        assert roles["yes"] == 2  # option entity
        assert roles["other"] == 0

    def test_element_graph_round_trip(self, tmp_path):
        rng = np.random.default_rng(11)
        graph = random_graph(rng, n=30)
        eg = prune_kg(qa("start from node_3"), graph, HashScorer(), n=12, hops=2)
        path = tmp_path / "eg.json"
        eg.save(path)
        loaded = ElementGraph.load(path)
        assert loaded.to_json() == eg.to_json()


def test_sigmoid_extremes_are_finite():
    assert sigmoid(1000.0) == 1.0
    assert sigmoid(-1000.0) == pytest.approx(0.0)
    assert sigmoid(0.0) == 0.5
