"""Load a small knowledge graph from triples, ground entities, expand neighborhoods.

Run from the repository root:  python3 demos/01_knowledge_graph.py
"""

import tempfile

from kgexplain import ground_entities, load_triples, neighborhood

TRIPLES = """\
isa\tcat\tanimal
isa\tdog\tanimal
relatedto\tcat\tdog
atlocation\tcat\tgarden
capableof\tcat\tchase mice
relatedto\tchase mice\tmice
atlocation\tmice\tgarden
"""

with tempfile.NamedTemporaryFile("w", suffix=".tsv", delete=False) as fh:
    fh.write(TRIPLES)
    path = fh.name

graph = load_triples(path)
print(f"loaded {graph.node_count} nodes, {graph.edge_count} edges, "
      f"{graph.relation_type_count} relation types")
print("node labels:", graph.labels)

# Grounding finds every node whose label appears as a token n-gram of the
# text; multi-word labels like "chase mice" match as bigrams, longest wins.
text = "Why does a CAT chase mice around the garden?"
seeds = ground_entities(text, graph)
print(f"\ngrounded in {text!r}:")
for nid in sorted(seeds):
    print(f"  {nid}: {graph.labels[nid]}")

# Neighborhood expansion is breadth-first and undirected; two hops is the
# working radius for pruning.
hood = neighborhood(graph, seeds, hops=1)
print(f"\n1-hop neighborhood: {sorted(graph.labels[i] for i in hood.node_ids)}")
hood2 = neighborhood(graph, seeds, hops=2)
print(f"2-hop neighborhood: {sorted(graph.labels[i] for i in hood2.node_ids)}")
print("hop distances:", {graph.labels[i]: d for i, d in sorted(hood2.hop_distance.items())})
