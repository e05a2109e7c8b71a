"""Two-stage explanation generation: why-choose, then why-not-choose.

Stage 1 asks the generator to explain the predicted choice in terms of the
ranked reason elements; its output feeds stage 2, which explains why the
remaining options were dismissed. Reviewer feedback re-enters as an
appended notes block so the canonical templates stay byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dataset import ExplanationInstance, with_refined_explanations
from .errors import GenerationError, KgExplainError
from .pruning import QAContext

DEFAULT_TASK_TYPE = "commonsense question answering"
DEFAULT_MAX_REFINEMENTS = 3

STAGE1_TEMPLATE = (
    "Basis: Given a LM augmented with a graph attention network to extract key "
    "reasoning elements for decision-making. The task is {task_type}.\n"
    "\n"
    "Input: The question is: {question}. The Answer Options are: {options}\n"
    "\n"
    "Output: The model predicted choice {predicted}.{gold_note} "
    "Based on the Ranked Reason-elements: {elements}\n"
    "\n"
    "Explanation (Stage 1): Explain the LM's reasoning process for selecting "
    "{predicted} over the other options. Provide concise explanations for why each "
    "reason-element supports {predicted} as the predicted choice. Focus on the LM's "
    "behavior and the significance of the Ranked Reason-elements. Your response "
    "should be short and concise."
)

STAGE2_TEMPLATE = (
    "Explanation (Stage 2): Based on the {why}, explain why this LM makes the other "
    "options less likely {remaining}. Your response should be short and concise."
)


@dataclass
class ExplanationRequest:
    """Everything the prompt builders need for one instance."""

    task_type: str
    qa: QAContext
    predicted: int
    gold: str | None
    reason_elements: list[tuple[str, float]]

    def __post_init__(self) -> None:
        if not 0 <= self.predicted < len(self.qa.options):
            raise KgExplainError(f"predicted index {self.predicted} out of range")
        if not self.reason_elements:
            raise KgExplainError("reason elements must be nonempty")

    @property
    def predicted_text(self) -> str:
        return self.qa.options[self.predicted]

    @property
    def top_elements(self) -> list[str]:
        return [label for label, _ in self.reason_elements[:5]]


@dataclass
class ExplanationPair:
    why: str
    why_not: str
    generator_id: str
    revision: int = 0

    def __post_init__(self) -> None:
        if not self.why.strip() or not self.why_not.strip():
            raise GenerationError("explanation texts must be nonempty")
        if self.revision < 0:
            raise KgExplainError("revision must be >= 0")


def format_options(options: list[str]) -> str:
    return ", ".join(f"{chr(65 + i)}. {opt}" for i, opt in enumerate(options))


def _quote_join(items: list[str]) -> str:
    return ", ".join(f'"{item}"' for item in items)


def build_stage1_prompt(
    req: ExplanationRequest,
    reviewer_notes: list[str] | None = None,
    include_gold: bool = False,
) -> str:
    """Stage-1 (why-choose) instruction with the request's slots filled in.

    Pure: the same request always yields the byte-identical prompt. The gold
    label is only revealed when ``include_gold`` is set and the prediction
    missed it.
    """
    elements = req.top_elements
    if not elements:
        raise KgExplainError("no reason elements to cite")
    gold_note = ""
    if include_gold and req.gold is not None and req.gold != req.predicted_text:
        gold_note = f" The correct answer is {req.gold}."
    prompt = STAGE1_TEMPLATE.format(
        task_type=req.task_type,
        question=req.qa.question,
        options=format_options(req.qa.options),
        predicted=req.predicted_text,
        gold_note=gold_note,
        elements=_quote_join(elements),
    )
    if reviewer_notes:
        notes = "\n".join(f"- {note}" for note in reviewer_notes)
        prompt += f"\n\nReviewer notes:\n{notes}"
    return prompt


def build_stage2_prompt(why: str, options: list[str], predicted: str) -> str:
    """Stage-2 (why-not-choose) instruction over the non-predicted options."""
    if not why.strip():
        raise KgExplainError("stage-2 needs the stage-1 explanation text")
    if predicted not in options:
        raise KgExplainError(f"predicted option {predicted!r} is not among the options")
    remaining = [opt for opt in options if opt != predicted]
    if not remaining:
        raise KgExplainError("no remaining options to explain away")
    return STAGE2_TEMPLATE.format(why=why, remaining=_quote_join(remaining))


def generate(
    req: ExplanationRequest,
    client,
    reviewer_notes: list[str] | None = None,
    include_gold: bool = False,
    revision: int = 0,
) -> ExplanationPair:
    """Run the two-stage process: stage 1 produces the why text, which is
    embedded in the stage-2 prompt to produce the why-not text."""
    stage1 = build_stage1_prompt(req, reviewer_notes=reviewer_notes, include_gold=include_gold)
    why = client.complete([{"role": "user", "content": stage1}])
    if not why or not why.strip():
        raise GenerationError("stage-1 completion is empty")
    stage2 = build_stage2_prompt(why, req.qa.options, req.predicted_text)
    why_not = client.complete([{"role": "user", "content": stage2}])
    if not why_not or not why_not.strip():
        raise GenerationError("stage-2 completion is empty")
    return ExplanationPair(
        why=why.strip(),
        why_not=why_not.strip(),
        generator_id=getattr(client, "model_name", "unknown"),
        revision=revision,
    )


@dataclass
class RefinementOutcome:
    instance: ExplanationInstance
    revision: int
    needs_manual_review: bool = False
    pair: ExplanationPair | None = field(default=None, repr=False)


def request_from_instance(instance: ExplanationInstance, task_type: str = DEFAULT_TASK_TYPE) -> ExplanationRequest:
    qa = QAContext(
        question=instance.question,
        options=list(instance.answers),
        context_embedding=instance.embedding if instance.embedding else [0.0],
    )
    return ExplanationRequest(
        task_type=task_type,
        qa=qa,
        predicted=instance.answers.index(instance.predicted_label),
        gold=instance.label,
        reason_elements=[(label, 0.0) for label in instance.topk],
    )


def refine(
    instance: ExplanationInstance,
    review_flags: list[str],
    client,
    revision: int = 0,
    max_refinements: int = DEFAULT_MAX_REFINEMENTS,
    task_type: str = DEFAULT_TASK_TYPE,
) -> RefinementOutcome:
    """One review-triggered regeneration round.

    ``revision`` counts the refinements already performed; once the bound is
    reached the instance is handed to manual review instead of regenerating.
    """
    if not review_flags:
        raise KgExplainError("refinement needs at least one review flag")
    if revision >= max_refinements:
        return RefinementOutcome(instance=instance, revision=revision, needs_manual_review=True)
    req = request_from_instance(instance, task_type=task_type)
    pair = generate(req, client, reviewer_notes=review_flags, revision=revision + 1)
    refined = with_refined_explanations(instance, pair.why, pair.why_not)
    return RefinementOutcome(instance=refined, revision=pair.revision, pair=pair)
