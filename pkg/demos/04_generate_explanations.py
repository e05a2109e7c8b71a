"""Build the two-stage why / why-not prompts, generate with the offline mock,
and grade the result with the debugger evaluator.

Run from the repository root:  python3 demos/04_generate_explanations.py
(Point LlmClientConfig at a real endpoint to use a live model instead.)
"""

import numpy as np

from kgexplain import ExplanationRequest, QAContext, generate
from kgexplain.dataset import ExplanationInstance
from kgexplain.debugger import build_debugger_prompt, render_scores, score_instance
from kgexplain.explain import build_stage1_prompt, build_stage2_prompt
from kgexplain.mocks import pipeline_mock_client

request = ExplanationRequest(
    task_type="commonsense question answering",
    qa=QAContext(
        question="what do cats usually chase around the garden?",
        options=["mice", "yarn", "cars", "dreams", "shadows"],
        context_embedding=np.zeros(8),
    ),
    predicted=0,
    gold="mice",
    reason_elements=[("mice", 0.31), ("garden", 0.22), ("whiskers", 0.12),
                     ("birds", 0.08), ("window", 0.05)],
)

print("=== stage-1 instruction (why-choose) ===")
stage1 = build_stage1_prompt(request)
print(stage1)

client = pipeline_mock_client()
pair = generate(request, client)
print("\n=== generated pair (mock model) ===")
print("why:     ", pair.why)
print("why not: ", pair.why_not)

print("\n=== stage-2 instruction fed the stage-1 output ===")
print(build_stage2_prompt(pair.why, request.qa.options, request.predicted_text)[:200], "...")

instance = ExplanationInstance(
    question=request.qa.question,
    answers=request.qa.options,
    label="mice",
    predicted_label="mice",
    label_matched=True,
    concept=[label for label, _ in request.reason_elements] * 10,
    topk=[label for label, _ in request.reason_elements],
    explanation_why=pair.why,
    explanation_why_not=pair.why_not,
    debugger_score="Faithfulness: 1 | Completeness: 1 | Accuracy: 1",
    embedding=[0.0] * 8,
)

print("\n=== debugger evaluation ===")
print(build_debugger_prompt(instance)[:300], "...\n")
score = score_instance(instance, client)
print("parsed:", render_scores(score), f"-> overall {score.overall_display}")
