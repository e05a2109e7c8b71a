"""Drive the review-and-refine loop through the HTTP service API.

Uses the in-process test client so the demo runs offline; `kgexplain serve`
exposes the same endpoints over real HTTP for the browser UI.

Run from the repository root:  python3 demos/06_review_service.py
(needs the dev extras for the in-process client: pip install -e .[dev])
"""

import tempfile

from fastapi.testclient import TestClient

from kgexplain import HashScorer, Pipeline, ReviewStore, ServiceContext, create_app
from kgexplain.evalkit import METRIC_KEYS
from kgexplain.gat import GatConfig, init_params
from kgexplain.kg import Edge, KnowledgeGraph
from kgexplain.mocks import pipeline_mock_client

labels = ["cat", "garden", "mice", "yarn", "cars", "dreams", "shadows"]
labels += [f"concept_{i:02d}" for i in range(60)]
edges = [Edge(0, i, i % 2) for i in range(1, len(labels))]
graph = KnowledgeGraph(labels=labels, node_types=[0] * len(labels), edges=edges,
                       node_type_names=["entity"], relation_type_names=["related", "near"])

config = GatConfig(layers=2, hidden=16, message_dim=16, relation_dim=8, node_type_count=3,
                   relation_type_count=2, lm_dim=64, option_count=5, answer_hidden=16,
                   dropout=0.0, seed=0)
mock = pipeline_mock_client()
pipeline = Pipeline(graph=graph, scorer=HashScorer(), params=init_params(config),
                    llm_client=mock, debugger_client=mock, prune_budget=55, hops=2)

store_dir = tempfile.mkdtemp(prefix="review-")
ctx = ServiceContext(pipeline=pipeline, review_store=ReviewStore(store_dir), review_mode=True)
client = TestClient(create_app(ctx))

body = {"question": "what do cats chase around the garden?",
        "options": ["mice", "yarn", "cars", "dreams", "shadows"]}
resp = client.post("/v1/explain", json=body).json()
item_id = resp["review_item_id"]
print(f"explained and enqueued as {item_id}; prediction: {resp['instance']['predicted_label']}")

item = client.get("/v1/review/next").json()["item"]
print(f"reviewer sees {item['item_id']} at revision {item['revision']} ({item['status']})")

# The reviewer spots a discrepancy: the item is flagged, regenerated by the
# generator with the note appended, and returns to the queue one revision up.
client.post(f"/v1/review/{item_id}/flag", json={"note": "why-text does not cite the elements"})
item = client.get("/v1/review/next").json()["item"]
print(f"after flag: revision {item['revision']}, status {item['status']}")

# A clean second pass: all seven three-point judgments submitted -> approved.
scores = {metric: 3 for metric in METRIC_KEYS}
item = client.post(f"/v1/review/{item_id}/scores", json={"evaluator": "demo", **scores}).json()["item"]
print(f"after scores: status {item['status']}")

# State survives a restart: reload the store from disk and compare.
reloaded = ReviewStore(store_dir)
print("restart reproduces state:", reloaded.state_fingerprint() == ctx.review_store.state_fingerprint())
print(f"event log and snapshot live in {store_dir}")
