"""Knowledge graph store: triple loading, entity grounding, hop-limited neighborhoods.

The graph is immutable after loading and safe for concurrent reads. Edges are
stored directed (as they appear in the triple file) but neighborhood expansion
treats them as undirected: commonsense relevance is not direction-bound.
"""

from __future__ import annotations

import json
import os
import re
from collections import deque
from dataclasses import dataclass, field

from .errors import KgExplainError, TripleParseError

GRAPH_FORMAT = "kg-index"
GRAPH_FORMAT_VERSION = 1

_TOKEN_RE = re.compile(r"[a-z0-9]+")
MAX_NGRAM = 3


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    rel: int


@dataclass
class KnowledgeGraph:
    """Typed nodes plus relation-typed directed edges.

    Node ids are contiguous from 0 in order of first appearance, which makes
    loading deterministic and reproducible across runs.
    """

    labels: list[str] = field(default_factory=list)
    node_types: list[int] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    node_type_names: list[str] = field(default_factory=lambda: ["entity"])
    relation_type_names: list[str] = field(default_factory=list)

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def node_type_count(self) -> int:
        return len(self.node_type_names)

    @property
    def relation_type_count(self) -> int:
        return len(self.relation_type_names)

    def check_invariants(self) -> None:
        n = self.node_count
        if len(self.node_types) != n:
            raise KgExplainError("node_types length does not match node count")
        for t in self.node_types:
            if not 0 <= t < self.node_type_count:
                raise KgExplainError(f"node type index {t} out of range")
        for e in self.edges:
            if not (0 <= e.src < n and 0 <= e.dst < n):
                raise KgExplainError(f"edge endpoint out of range: {e}")
            if not 0 <= e.rel < self.relation_type_count:
                raise KgExplainError(f"relation type index {e.rel} out of range")

    def adjacency(self) -> list[list[int]]:
        """Undirected adjacency lists (deduplicated, sorted)."""
        adj: list[set[int]] = [set() for _ in range(self.node_count)]
        for e in self.edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        return [sorted(s) for s in adj]


@dataclass
class Neighborhood:
    """Nodes reachable from a seed set within a hop bound, plus induced edges."""

    node_ids: set[int]
    edges: list[Edge]
    hop_distance: dict[int, int]


def load_triples(path: str | os.PathLike) -> KnowledgeGraph:
    """Load a 3-column TSV of ``relation<TAB>head<TAB>tail`` triples.

    Nodes are deduplicated by label and numbered in order of first
    appearance; duplicate triples are dropped. Lines starting with ``#``
    and blank lines are skipped.
    """
    path = os.fspath(path)
    labels: list[str] = []
    node_ids: dict[str, int] = {}
    relation_ids: dict[str, int] = {}
    relation_names: list[str] = []
    edges: list[Edge] = []
    seen_edges: set[tuple[int, int, int]] = set()

    def intern_node(label: str) -> int:
        nid = node_ids.get(label)
        if nid is None:
            nid = len(labels)
            node_ids[label] = nid
            labels.append(label)
        return nid

    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise TripleParseError(path, line_no, f"expected 3 tab-separated fields, got {len(parts)}")
            rel, head, tail = parts
            if not rel.strip():
                raise TripleParseError(path, line_no, "empty relation")
            if not head.strip() or not tail.strip():
                raise TripleParseError(path, line_no, "empty node label")
            rid = relation_ids.get(rel)
            if rid is None:
                rid = len(relation_names)
                relation_ids[rel] = rid
                relation_names.append(rel)
            src = intern_node(head)
            dst = intern_node(tail)
            key = (src, dst, rid)
            if key not in seen_edges:
                seen_edges.add(key)
                edges.append(Edge(src, dst, rid))

    graph = KnowledgeGraph(
        labels=labels,
        node_types=[0] * len(labels),
        edges=edges,
        node_type_names=["entity"],
        relation_type_names=relation_names,
    )
    graph.check_invariants()
    return graph


def normalize_label(label: str) -> tuple[str, ...]:
    """Lowercased token tuple of a label; underscores behave as spaces."""
    return tuple(_TOKEN_RE.findall(label.replace("_", " ").lower()))


def tokenize_text(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def build_label_index(graph: KnowledgeGraph) -> dict[tuple[str, ...], set[int]]:
    """Map normalized token n-grams (n <= MAX_NGRAM) to node ids."""
    index: dict[tuple[str, ...], set[int]] = {}
    for nid, label in enumerate(graph.labels):
        toks = normalize_label(label)
        if 0 < len(toks) <= MAX_NGRAM:
            index.setdefault(toks, set()).add(nid)
    return index


def ground_entities(
    text: str,
    graph: KnowledgeGraph,
    label_index: dict[tuple[str, ...], set[int]] | None = None,
) -> set[int]:
    """Find KG nodes whose labels occur as token n-grams of the text.

    Matching is case-insensitive; on overlaps the longest match wins and
    consumes its tokens (greedy left-to-right scan).
    """
    if label_index is None:
        label_index = build_label_index(graph)
    tokens = tokenize_text(text)
    found: set[int] = set()
    i = 0
    while i < len(tokens):
        matched = False
        for n in range(min(MAX_NGRAM, len(tokens) - i), 0, -1):
            gram = tuple(tokens[i : i + n])
            hit = label_index.get(gram)
            if hit:
                found |= hit
                i += n
                matched = True
                break
        if not matched:
            i += 1
    return found


def neighborhood(graph: KnowledgeGraph, seeds: set[int], hops: int) -> Neighborhood:
    """Breadth-first expansion of the seed set, undirected, up to ``hops``.

    Hop distance is the minimum undirected distance to any seed. The edge
    set is the full induced (directed, as stored) edge set among members.
    """
    if not seeds:
        raise KgExplainError("seed set is empty")
    if hops < 0:
        raise KgExplainError("hops must be >= 0")
    for s in seeds:
        if not 0 <= s < graph.node_count:
            raise KgExplainError(f"invalid seed node id {s}")

    adj = graph.adjacency()
    dist: dict[int, int] = {s: 0 for s in seeds}
    queue = deque(sorted(seeds))
    while queue:
        u = queue.popleft()
        if dist[u] == hops:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)

    members = set(dist)
    induced = [e for e in graph.edges if e.src in members and e.dst in members]
    return Neighborhood(node_ids=members, edges=induced, hop_distance=dist)


def save_graph(graph: KnowledgeGraph, path: str | os.PathLike) -> None:
    """Persist as line-delimited JSON: one header record, then nodes, then edges."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        header = {
            "format": GRAPH_FORMAT,
            "version": GRAPH_FORMAT_VERSION,
            "node_count": graph.node_count,
            "edge_count": graph.edge_count,
            "node_type_names": graph.node_type_names,
            "relation_type_names": graph.relation_type_names,
        }
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for nid, label in enumerate(graph.labels):
            fh.write(json.dumps([nid, label, graph.node_types[nid]], ensure_ascii=False) + "\n")
        for e in graph.edges:
            fh.write(json.dumps([e.src, e.dst, e.rel]) + "\n")
    os.replace(tmp, path)


def load_graph(path: str | os.PathLike) -> KnowledgeGraph:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != GRAPH_FORMAT:
            raise KgExplainError(f"{path}: not a {GRAPH_FORMAT} file")
        if header.get("version") != GRAPH_FORMAT_VERSION:
            raise KgExplainError(f"{path}: unsupported version {header.get('version')}")
        labels: list[str] = []
        node_types: list[int] = []
        for _ in range(header["node_count"]):
            nid, label, ntype = json.loads(fh.readline())
            if nid != len(labels):
                raise KgExplainError(f"{path}: node ids out of order")
            labels.append(label)
            node_types.append(ntype)
        edges = []
        for _ in range(header["edge_count"]):
            src, dst, rel = json.loads(fh.readline())
            edges.append(Edge(src, dst, rel))
    graph = KnowledgeGraph(
        labels=labels,
        node_types=node_types,
        edges=edges,
        node_type_names=header["node_type_names"],
        relation_type_names=header["relation_type_names"],
    )
    graph.check_invariants()
    return graph


def convert_conceptnet_csv(csv_path: str | os.PathLike, out_path: str | os.PathLike, language: str = "en") -> int:
    """Convert a ConceptNet assertions dump to the 3-column triple TSV.

    Keeps edges whose both endpoints are in ``language``; strips the URI
    scheme down to bare relation and concept names. Returns the number of
    triples written.
    """
    csv_path = os.fspath(csv_path)
    out_path = os.fspath(out_path)
    prefix = f"/c/{language}/"
    written = 0
    tmp = out_path + ".tmp"
    with open(csv_path, encoding="utf-8") as src, open(tmp, "w", encoding="utf-8") as dst:
        for raw in src:
            parts = raw.rstrip("\n").split("\t")
            if len(parts) < 4:
                continue
            rel_uri, head_uri, tail_uri = parts[1], parts[2], parts[3]
            if not (head_uri.startswith(prefix) and tail_uri.startswith(prefix)):
                continue
            rel = rel_uri.rsplit("/", 1)[-1].lower()
            head = head_uri[len(prefix):].split("/", 1)[0]
            tail = tail_uri[len(prefix):].split("/", 1)[0]
            if not (rel and head and tail):
                continue
            dst.write(f"{rel}\t{head}\t{tail}\n")
            written += 1
    os.replace(tmp, out_path)
    return written
