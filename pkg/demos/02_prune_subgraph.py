"""Score nodes for relevance to a question and prune to the element graph.

Run from the repository root:  python3 demos/02_prune_subgraph.py
"""

import numpy as np

from kgexplain import HashScorer, QAContext, prune_kg
from kgexplain.embedding import HashingEmbedder
from kgexplain.kg import Edge, KnowledgeGraph

# A toy graph: "cat" is connected to food, places, and behaviors.
labels = ["cat", "mice", "yarn", "garden", "fish", "sleep", "tree", "whiskers",
          "milk", "birds", "sofa", "window"]
edges = [Edge(0, i, i % 3) for i in range(1, len(labels))]
edges += [Edge(1, 3, 0), Edge(9, 6, 1), Edge(4, 8, 2)]
graph = KnowledgeGraph(
    labels=labels,
    node_types=[0] * len(labels),
    edges=edges,
    node_type_names=["entity"],
    relation_type_names=["related", "capable", "location"],
)

embedder = HashingEmbedder(dimension=64)
question = "what does the cat chase in the garden?"
options = ["mice", "yarn", "fish"]
qa = QAContext(question, options, embedder.embed(question + " " + " ".join(options)))

# The hash scorer is the deterministic offline stand-in for an LM-backed
# relevance head; swap in EmbeddingScorer(HttpEmbedder(...)) for a live model.
eg = prune_kg(qa, graph, HashScorer(seed=0), n=6, hops=2)

print(f"retained {eg.node_count} of {graph.node_count} nodes:")
for i in range(eg.node_count):
    role = eg.node_type_names[eg.node_types[i]]
    print(f"  {eg.labels[i]:<10} relevance={eg.relevance[i]:.3f}  role={role}")
print(f"\ninduced edges: {[(eg.labels[e.src], eg.labels[e.dst]) for e in eg.edges]}")

# The element graph serializes deterministically, so two identical prunes
# produce byte-identical records.
again = prune_kg(qa, graph, HashScorer(seed=0), n=6, hops=2)
print("\ndeterministic serialization:", eg.to_json() == again.to_json())
