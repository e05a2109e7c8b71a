"""Retrieve in-context demonstrations by embedding similarity and pick each
instance's best explanation by weighted debugger-score.

Run from the repository root:  python3 demos/05_retrieve_demonstrations.py
"""

from kgexplain import QAContext, SelectionWeights
from kgexplain.dataset import ExplanationInstance
from kgexplain.embedding import HashingEmbedder
from kgexplain.retrieval import DemoRetriever, build_icl_prompt

embedder = HashingEmbedder(dimension=128)


def record(question: str, answer: str, why: str, why_not: str, score: str) -> ExplanationInstance:
    options = ["mice", "yarn", "cars", "dreams", "shadows"]
    return ExplanationInstance(
        question=question,
        answers=options,
        label=answer,
        predicted_label=answer,
        label_matched=True,
        concept=[f"element_{i}" for i in range(50)],
        topk=[f"element_{i}" for i in range(5)],
        explanation_why=why,
        explanation_why_not=why_not,
        debugger_score=score,
        embedding=[float(x) for x in embedder.embed(question + " " + " ".join(options))],
    )


# Two alternative explanations of the same question (e.g. from two different
# models) share a question id; the selector keeps the higher-scoring one.
corpus = [
    record("what do cats chase in the garden?", "mice",
           "the model linked chasing behavior to prey", "yarn is play, not chase",
           "Faithfulness: 3 | Completeness: 3 | Accuracy: 3"),
    record("what do cats chase in the garden?", "mice",
           "the model grounded the chase in the garden scene and typical prey",
           "the remaining options lack prey semantics",
           "Faithfulness: 5 | Completeness: 4 | Accuracy: 5"),
    record("what do cats play with indoors?", "yarn",
           "play associates with yarn", "mice are chased outdoors, not played with",
           "Faithfulness: 4 | Completeness: 3 | Accuracy: 4"),
    record("what appears on the wall at dusk?", "shadows",
           "dusk lighting produces shadows", "the other options are not lighting effects",
           "Faithfulness: 4 | Completeness: 4 | Accuracy: 4"),
]

retriever = DemoRetriever(corpus)
print(f"index: {len(retriever.index)} instances, dimension {retriever.index.dimension}")

question = "what would a cat run after outside?"
options = ["mice", "yarn", "cars", "dreams", "shadows"]
query = QAContext(question, options, embedder.embed(question + " " + " ".join(options)))

# Weights express user preferences over the debugger-score dimensions; the
# derived overall dimension stays at zero to avoid double counting.
weights = SelectionWeights(faithfulness=1.0, completeness=1.0, accuracy=1.0, overall=0.0)
demos = retriever.retrieve(query.context_embedding, m=2, weights=weights)

for demo in demos:
    print(f"\nrank {demo.rank}  similarity={demo.score:.3f}  chose explanation {demo.explanation_id}")
    print(f"  Q: {demo.instance.question}")
    print(f"  why: {demo.instance.explanation_why}")

print("\n=== assembled in-context prompt ===")
print(build_icl_prompt(query, demos))
