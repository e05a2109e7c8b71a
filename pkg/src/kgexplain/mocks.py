"""Deterministic offline LLM behavior for tests, demos, and --mock runs."""

from __future__ import annotations

from .llm import MockChatClient


def _why_text(prompt: str) -> str:
    key = MockChatClient.prompt_key(prompt)[:8]
    return (
        "The model grounded its choice in the ranked reason-elements, linking each "
        f"element to the predicted option. (trace {key})"
    )


def _why_not_text(prompt: str) -> str:
    key = MockChatClient.prompt_key(prompt)[:8]
    return (
        "The remaining options found little support in the highlighted reason-elements, "
        f"so the model rated them less likely. (trace {key})"
    )


def pipeline_mock_client(score_line: str = "Faithfulness: 4 | Completeness: 3 | Accuracy: 4") -> MockChatClient:
    """A mock chat model that answers all three pipeline prompt shapes.

    Rule order matters: the debugger prompt also mentions explanations, so it
    must match before the stage templates.
    """
    return MockChatClient(
        model_name="mock-pipeline",
        rules=[
            ("LM debuggers", score_line),
            ("Explanation (Stage 2)", _why_not_text),
            ("Explanation (Stage 1)", _why_text),
        ],
    )
