"""Debugger-score prompt, parsing, and aggregation."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from kgexplain.debugger import (
    DebuggerScore,
    build_debugger_prompt,
    overall,
    parse_scores,
    render_scores,
    score_instance,
)
from kgexplain.errors import EvaluationError, KgExplainError, ScoreParseError
from kgexplain.llm import MockChatClient

from helpers import WORKED_SCORE_LINE, worked_instance

# frozen reference aggregates: per-dimension means and their overall column
REFERENCE_ROWS = [
    ("gpt-3.5-turbo vanilla", 3.50, 2.95, 3.65, 3.37),
    ("gpt-3.5-turbo enhanced", 3.45, 3.05, 3.55, 3.35),
    ("gpt-4-turbo vanilla", 3.67, 3.10, 3.95, 3.57),
    ("gpt-4-turbo enhanced", 4.05, 3.65, 4.10, 3.93),
    ("llama3-8b vanilla", 3.50, 2.65, 3.60, 3.25),
    ("llama3-8b enhanced", 3.35, 2.85, 3.35, 3.18),
    ("llama3-70b vanilla", 3.60, 2.85, 3.80, 3.42),
    ("llama3-70b enhanced", 3.95, 3.10, 4.05, 3.70),
    ("mixtral-8x7b vanilla", 3.70, 2.90, 3.80, 3.47),
    ("mixtral-8x7b enhanced", 3.75, 3.05, 3.80, 3.53),
]


class TestOverall:
    @pytest.mark.parametrize("name,f,c,a,reported", REFERENCE_ROWS)
    def test_mean_reproduces_reference_overall(self, name, f, c, a, reported):
        assert abs(overall(f, c, a) - reported) <= 0.005

    def test_perfect_scores(self):
        assert overall(5, 5, 5) == 5.0

    def test_specific_rows(self):
        assert overall(4.05, 3.65, 4.10) == pytest.approx(3.9333, abs=1e-4)
        assert overall(3.50, 2.95, 3.65) == pytest.approx(3.3667, abs=1e-4)

    def test_permutation_symmetric(self):
        values = (4.0, 2.5, 3.0)
        results = {overall(*perm) for perm in itertools.permutations(values)}
        assert len(results) == 1

    def test_monotone_in_each_argument(self):
        base = overall(3, 3, 3)
        assert overall(4, 3, 3) > base
        assert overall(3, 4, 3) > base
        assert overall(3, 3, 4) > base

    def test_range_enforced(self):
        with pytest.raises(KgExplainError):
            overall(0.5, 3, 3)
        with pytest.raises(KgExplainError):
            overall(3, 3, 6)


class TestParseScores:
    def test_worked_example_line(self):
        score = parse_scores("Faithfulness: 4 | Completeness: 3 | Accuracy: 4")
        assert (score.faithfulness, score.completeness, score.accuracy) == (4, 3, 4)
        assert score.overall_display == 3.67

    def test_label_order_insensitive(self):
        score = parse_scores("Accuracy: 5 | Faithfulness: 5 | Completeness: 5")
        assert (score.faithfulness, score.completeness, score.accuracy) == (5, 5, 5)
        assert score.overall_display == 5.0

    def test_case_insensitive_with_surrounding_prose(self):
        text = "Sure! Here is my assessment.\nfaithfulness: 2 | COMPLETENESS: 3 | Accuracy: 4\nHope this helps."
        score = parse_scores(text)
        assert (score.faithfulness, score.completeness, score.accuracy) == (2, 3, 4)

    def test_markdown_decorations_tolerated(self):
        score = parse_scores("**Faithfulness:** 4 | **Completeness:** 3 | **Accuracy:** 4")
        assert score.faithfulness == 4

    def test_out_of_range_rejected(self):
        with pytest.raises(ScoreParseError):
            parse_scores("Faithfulness: 6 | Completeness: 3 | Accuracy: 4")
        with pytest.raises(ScoreParseError):
            parse_scores("Faithfulness: 0 | Completeness: 3 | Accuracy: 4")

    def test_missing_dimension_rejected_with_raw_text(self):
        with pytest.raises(ScoreParseError) as err:
            parse_scores("Faithfulness: 4 | Accuracy: 4")
        assert "Faithfulness: 4" in str(err.value)

    def test_decimal_values_accepted(self):
        score = parse_scores("Faithfulness: 4.5 | Completeness: 3.05 | Accuracy: 4")
        assert score.faithfulness == 4.5
        assert score.completeness == 3.05

    def test_round_trip_all_integer_triples(self):
        for f, c, a in itertools.product(range(1, 6), repeat=3):
            score = DebuggerScore(f, c, a)
            assert parse_scores(render_scores(score)) == score

    @given(
        st.integers(1, 5),
        st.integers(1, 5),
        st.integers(1, 5),
    )
    def test_round_trip_property(self, f, c, a):
        score = DebuggerScore(float(f), float(c), float(a))
        assert parse_scores(render_scores(score)) == score


class TestPrompt:
    def test_contains_three_criteria_headings(self):
        prompt = build_debugger_prompt(worked_instance())
        for heading in ("Faithfulness:", "Completeness:", "Accuracy:"):
            assert heading in prompt

    def test_differs_only_in_why_slot(self):
        a = build_debugger_prompt(worked_instance())
        b = build_debugger_prompt(worked_instance(explanation_why="ENTIRELY DIFFERENT TEXT"))
        assert a != b
        assert a.replace(worked_instance().explanation_why, "ENTIRELY DIFFERENT TEXT") == b

    def test_embeds_instance_fields(self):
        prompt = build_debugger_prompt(worked_instance())
        assert worked_instance().question in prompt
        assert "unfeeling" in prompt

    def test_missing_why_not_rejected(self):
        with pytest.raises(KgExplainError):
            build_debugger_prompt(worked_instance(explanation_why_not=""))

    def test_scale_instruction_present(self):
        assert "scale from 1 to 5" in build_debugger_prompt(worked_instance())


class TestScoreInstance:
    def test_mock_returning_worked_line(self):
        mock = MockChatClient(script=[WORKED_SCORE_LINE])
        score = score_instance(worked_instance(), mock)
        assert (score.faithfulness, score.completeness, score.accuracy) == (4, 3, 4)

    def test_reask_after_garbage(self):
        mock = MockChatClient(script=["no scores here, sorry", "Faithfulness: 2 | Completeness: 2 | Accuracy: 3"])
        score = score_instance(worked_instance(), mock)
        assert score.completeness == 2
        assert len(mock.calls) == 2
        reask = mock.calls[1][-1]["content"]
        assert "format" in reask.lower()

    def test_double_garbage_is_evaluation_error(self):
        mock = MockChatClient(script=["nope", "still nope"])
        with pytest.raises(EvaluationError):
            score_instance(worked_instance(), mock)


def test_debugger_score_validates_range():
    with pytest.raises(KgExplainError):
        DebuggerScore(0.0, 3.0, 3.0)
    with pytest.raises(KgExplainError):
        DebuggerScore(3.0, 3.0, 5.5)
