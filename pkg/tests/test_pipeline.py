"""End-to-end pipeline with the mock LLM: schema-conformant records out."""

from __future__ import annotations

import pytest

from kgexplain.dataset import validate
from kgexplain.debugger import parse_scores
from kgexplain.errors import NoSeedEntities
from kgexplain.gat import init_params
from kgexplain.mocks import pipeline_mock_client
from kgexplain.pipeline import Pipeline
from kgexplain.pruning import HashScorer

from helpers import PIPELINE_OPTIONS, PIPELINE_QUESTION, pipeline_gat_config, pipeline_kg


@pytest.fixture(scope="module")
def pipeline():
    mock = pipeline_mock_client()
    return Pipeline(
        graph=pipeline_kg(),
        scorer=HashScorer(seed=0),
        params=init_params(pipeline_gat_config()),
        llm_client=mock,
        debugger_client=mock,
        prune_budget=60,
        hops=2,
    )


class TestPipeline:
    def test_produces_schema_valid_instance(self, pipeline):
        instance = pipeline.explain(PIPELINE_QUESTION, PIPELINE_OPTIONS)
        assert validate(instance) == []
        assert len(instance.concept) == 50
        assert instance.topk == instance.concept[:5]
        assert instance.predicted_label in PIPELINE_OPTIONS
        assert instance.label_matched is True  # no gold supplied -> label := prediction
        parse_scores(instance.debugger_score)

    def test_gold_label_recorded(self, pipeline):
        instance = pipeline.explain(PIPELINE_QUESTION, PIPELINE_OPTIONS, gold="mice")
        assert instance.label == "mice"
        assert instance.label_matched == (instance.predicted_label == "mice")

    def test_deterministic_end_to_end(self, pipeline):
        a = pipeline.explain(PIPELINE_QUESTION, PIPELINE_OPTIONS)
        b = pipeline.explain(PIPELINE_QUESTION, PIPELINE_OPTIONS)
        assert a == b

    def test_no_seed_entities_raises(self, pipeline):
        with pytest.raises(NoSeedEntities):
            pipeline.explain("zzz qqq vvv?", ["aaa1", "bbb2", "ccc3", "ddd4", "eee5"])

    def test_embedding_matches_context(self, pipeline):
        instance = pipeline.explain(PIPELINE_QUESTION, PIPELINE_OPTIONS)
        assert len(instance.embedding) == pipeline.params.config.lm_dim
