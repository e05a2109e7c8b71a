"""Debugger-score: multidimensional explanation quality rated by an evaluator LLM.

The evaluator plays the role of a model debugger and scores an explanation
on faithfulness, completeness, and accuracy, each from 1 to 5. The overall
score is the arithmetic mean of the three dimensions; scores travel in a
canonical pipe-delimited line such as
``Faithfulness: 4 | Completeness: 3 | Accuracy: 4``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EvaluationError, KgExplainError, ScoreParseError
from .llm import Message

DIMENSIONS = ("faithfulness", "completeness", "accuracy")

_SCORE_RES = {
    name: re.compile(rf"{name}[^0-9\n]{{0,12}}([0-9]+(?:\.[0-9]+)?)", re.IGNORECASE)
    for name in DIMENSIONS
}

PROMPT_SYSTEM = (
    "Evaluators, assuming the role of LM debuggers with expertise in model parameter "
    "changes, assess explanations from the perspective of how model parameters influence "
    "decision-making. The assessment focuses on whether the explanation accurately "
    "reflects the computational and statistical mechanisms utilized by the LM."
)

PROMPT_CONTENT_PREAMBLE = (
    "Evaluators are presented with a task where the LM is augmented with key reasoning "
    "elements derived from its operation. This includes the question, answer options, "
    "the LM's prediction, and the corresponding explanation."
)

PROMPT_CRITERIA = (
    "Evaluation Criteria:\n"
    "- Faithfulness: Does the explanation accurately represent the underlying "
    "computational processes and data-driven mechanisms used by the LM to reach its "
    "conclusion?\n"
    "- Completeness: Does the explanation encompass all significant computational "
    "strategies and data insights relied upon by the LM to make the decision?\n"
    "- Accuracy: How precisely does the explanation reflect the true capabilities and "
    "decision-making processes of the LM, considering its design, training data, and "
    "functional algorithms?"
)

PROMPT_SCORING = (
    "Scoring: Score each dimension on a scale from 1 to 5, where 1 indicates the lowest "
    "level of adherence (poor) and 5 indicates the highest (excellent). Keep the "
    "evaluation balanced; avoid overly strict judgments. Answer with a single line in "
    "the exact format: Faithfulness: <score> | Completeness: <score> | Accuracy: <score>"
)

FORMAT_REMINDER = (
    "Your previous reply could not be parsed. Respond with exactly one line in the "
    "format: Faithfulness: <score> | Completeness: <score> | Accuracy: <score>, "
    "with each score between 1 and 5."
)


def overall(faithfulness: float, completeness: float, accuracy: float) -> float:
    """Arithmetic mean of the three dimensions."""
    for v in (faithfulness, completeness, accuracy):
        if not 1.0 <= v <= 5.0:
            raise KgExplainError(f"dimension value {v} outside [1, 5]")
    return (faithfulness + completeness + accuracy) / 3.0


@dataclass(frozen=True)
class DebuggerScore:
    faithfulness: float
    completeness: float
    accuracy: float

    def __post_init__(self) -> None:
        for name in DIMENSIONS:
            v = getattr(self, name)
            if not 1.0 <= v <= 5.0:
                raise KgExplainError(f"{name} score {v} outside [1, 5]")

    @property
    def overall(self) -> float:
        return overall(self.faithfulness, self.completeness, self.accuracy)

    @property
    def overall_display(self) -> float:
        """Overall rounded to 2 decimals, the form used in reports."""
        return round(self.overall, 2)


def _format_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:g}"


def render_scores(score: DebuggerScore) -> str:
    """Canonical pipe-delimited line for a score triple."""
    return (
        f"Faithfulness: {_format_value(score.faithfulness)} | "
        f"Completeness: {_format_value(score.completeness)} | "
        f"Accuracy: {_format_value(score.accuracy)}"
    )


def parse_scores(text: str) -> DebuggerScore:
    """Extract the three labeled scores from evaluator output.

    Label order does not matter, matching is case-insensitive, and prose
    around the score line is ignored. Missing or out-of-range values raise
    a parse error carrying the raw text.
    """
    values: dict[str, float] = {}
    for name, pattern in _SCORE_RES.items():
        match = pattern.search(text)
        if match is None:
            raise ScoreParseError(f"missing {name} score", text)
        value = float(match.group(1))
        if not 1.0 <= value <= 5.0:
            raise ScoreParseError(f"{name} score {value} outside [1, 5]", text)
        values[name] = value
    return DebuggerScore(**values)


def build_debugger_prompt(instance) -> str:
    """Evaluator prompt for one explanation instance.

    ``instance`` needs question, answers, predicted_label, explanation_why
    and explanation_why_not attributes (the dataset record shape).
    """
    if not instance.explanation_why or not instance.explanation_why.strip():
        raise KgExplainError("instance has no why-choose explanation")
    if not instance.explanation_why_not or not instance.explanation_why_not.strip():
        raise KgExplainError("instance has no why-not-choose explanation")
    options = ", ".join(instance.answers)
    return (
        f"System: {PROMPT_SYSTEM}\n\n"
        f"Content: {PROMPT_CONTENT_PREAMBLE}\n"
        f"Question: {instance.question}\n"
        f"Answer Options: {options}\n"
        f"Prediction: {instance.predicted_label}\n"
        f"Explanation (why): {instance.explanation_why}\n"
        f"Explanation (why not): {instance.explanation_why_not}\n\n"
        f"{PROMPT_CRITERIA}\n\n"
        f"{PROMPT_SCORING}"
    )


def score_instance(instance, client) -> DebuggerScore:
    """Prompt the evaluator and parse its reply, re-asking once on failure."""
    prompt = build_debugger_prompt(instance)
    messages: list[Message] = [{"role": "user", "content": prompt}]
    reply = client.complete(messages)
    try:
        return parse_scores(reply)
    except ScoreParseError:
        retry_messages = messages + [
            {"role": "assistant", "content": reply},
            {"role": "user", "content": FORMAT_REMINDER},
        ]
        second = client.complete(retry_messages)
        try:
            return parse_scores(second)
        except ScoreParseError as exc:
            raise EvaluationError(f"evaluator output unparseable twice: {exc}") from exc
