"""kgexplain: a knowledge-graph-grounded explanation engine for LLM reasoning.

The package prunes a QA-conditioned subgraph from a commonsense knowledge
graph, runs a graph attention network to score answers and rank reason
elements, generates two-stage why/why-not explanations through an external
LLM, retrieves grounded in-context demonstrations, scores explanation
quality with a debugger LLM, and serves a human review-and-refine loop.
"""

from .dataset import ExplanationInstance, read_instances, split_dataset, validate, word_count_stats, write_instances
from .debugger import DebuggerScore, build_debugger_prompt, overall, parse_scores, render_scores, score_instance
from .embedding import EmbeddingClientConfig, HashingEmbedder, HttpEmbedder
from .errors import KgExplainError
from .evalkit import LikertResponse, accuracy_compare, aggregate, build_report, normalize_likert, pearson
from .explain import (
    ExplanationPair,
    ExplanationRequest,
    build_stage1_prompt,
    build_stage2_prompt,
    generate,
    refine,
)
from .kg import KnowledgeGraph, ground_entities, load_graph, load_triples, neighborhood, save_graph
from .llm import ChatClient, LlmClientConfig, MockChatClient
from .pipeline import Pipeline
from .pruning import ElementGraph, HashScorer, QAContext, prune_kg, score_node
from .retrieval import DemoRetriever, RetrievalIndex, SelectionWeights, build_icl_prompt, cosine, select_explanation
from .review import ReviewItem, ReviewStore
from .service import ServiceContext, create_app

__version__ = "0.1.0"

__all__ = [
    "ChatClient",
    "DebuggerScore",
    "DemoRetriever",
    "ElementGraph",
    "EmbeddingClientConfig",
    "ExplanationInstance",
    "ExplanationPair",
    "ExplanationRequest",
    "HashScorer",
    "HashingEmbedder",
    "HttpEmbedder",
    "KgExplainError",
    "KnowledgeGraph",
    "LikertResponse",
    "LlmClientConfig",
    "MockChatClient",
    "Pipeline",
    "QAContext",
    "RetrievalIndex",
    "ReviewItem",
    "ReviewStore",
    "SelectionWeights",
    "ServiceContext",
    "accuracy_compare",
    "aggregate",
    "build_debugger_prompt",
    "build_icl_prompt",
    "build_report",
    "build_stage1_prompt",
    "build_stage2_prompt",
    "cosine",
    "create_app",
    "generate",
    "ground_entities",
    "load_graph",
    "load_triples",
    "neighborhood",
    "normalize_likert",
    "overall",
    "parse_scores",
    "pearson",
    "prune_kg",
    "read_instances",
    "refine",
    "render_scores",
    "save_graph",
    "score_instance",
    "score_node",
    "select_explanation",
    "split_dataset",
    "validate",
    "word_count_stats",
    "write_instances",
]
