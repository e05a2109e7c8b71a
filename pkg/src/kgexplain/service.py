"""HTTP service: explain / retrieve / review endpoints under /v1.

Bodies and responses reuse the dataset record field names so the CLI, the
service, and the reviewer UI share one schema. Review-item regeneration runs
as a background task guarded by a per-item lock.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from fastapi import BackgroundTasks, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import explain as explain_mod
from .debugger import render_scores, score_instance
from .errors import (
    ConfigurationError,
    GenerationError,
    KgExplainError,
    NoSeedEntities,
    TransportError,
)
from .evalkit import LIKERT_LEVELS, METRIC_KEYS
from .pipeline import Pipeline
from .retrieval import DemoRetriever, SelectionWeights, build_icl_prompt
from .review import IllegalTransition, ReviewStore, UnknownItem

logger = logging.getLogger(__name__)


@dataclass
class ServiceContext:
    pipeline: Pipeline
    retriever: DemoRetriever | None = None
    review_store: ReviewStore | None = None
    review_mode: bool = True
    default_m: int = 3


class _HttpError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


def _require(condition: bool, message: str, status: int = 400) -> None:
    if not condition:
        raise _HttpError(status, message)


def _parse_question_options(body: dict) -> tuple[str, list[str]]:
    _require(isinstance(body, dict), "body must be a JSON object")
    question = body.get("question")
    options = body.get("options")
    _require(isinstance(question, str) and question.strip() != "", "question must be a nonempty string")
    _require(isinstance(options, list) and all(isinstance(o, str) for o in options), "options must be a list of strings")
    _require(len(options) >= 2, "at least 2 options are required")
    _require(len(set(options)) == len(options), "options must be unique")
    return question, options


def _parse_weights(raw) -> SelectionWeights:
    if raw is None:
        return SelectionWeights()
    if isinstance(raw, list):
        _require(len(raw) == 4 and all(isinstance(v, (int, float)) for v in raw), "weights must be 4 numbers")
        values = dict(zip(("faithfulness", "completeness", "accuracy", "overall"), raw))
    elif isinstance(raw, dict):
        values = {k: raw.get(k, 0.0) for k in ("faithfulness", "completeness", "accuracy", "overall")}
        _require(all(isinstance(v, (int, float)) for v in values.values()), "weights must be numbers")
    else:
        raise _HttpError(400, "weights must be a list or object")
    try:
        weights = SelectionWeights(**values)
    except KgExplainError as exc:
        raise _HttpError(400, str(exc)) from exc
    _require(not weights.is_zero, "at least one selection weight must be positive")
    return weights


def _parse_likert_body(body: dict) -> dict:
    _require(isinstance(body, dict), "body must be a JSON object")
    answers = body.get("answers")
    if answers is None:
        answers = {k: v for k, v in body.items() if k in METRIC_KEYS}
    _require(isinstance(answers, dict), "answers must be an object")
    missing = [k for k in METRIC_KEYS if k not in answers]
    _require(not missing, f"missing metrics: {', '.join(missing)}")
    for key in METRIC_KEYS:
        _require(answers[key] in LIKERT_LEVELS, f"metric {key!r} must be one of 1, 2, 3")
    return {"evaluator": body.get("evaluator", "anonymous"), "answers": {k: answers[k] for k in METRIC_KEYS}}


def create_app(ctx: ServiceContext) -> FastAPI:
    app = FastAPI(title="kgexplain", version="1.0")

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    @app.exception_handler(_HttpError)
    async def _http_error_handler(request: Request, exc: _HttpError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/explain")
    def explain_endpoint(body: dict):
        question, options = _parse_question_options(body)
        gold = body.get("gold")
        _require(gold is None or isinstance(gold, str), "gold must be a string")
        if gold is not None:
            _require(gold in options, "gold must be one of the options")
        try:
            instance = ctx.pipeline.explain(question, options, gold=gold)
        except NoSeedEntities as exc:
            raise _HttpError(422, str(exc)) from exc
        except (TransportError, GenerationError) as exc:
            raise _HttpError(502, str(exc)) from exc
        except (ConfigurationError, KgExplainError) as exc:
            raise _HttpError(400, str(exc)) from exc
        response = {"instance": instance.to_json_dict()}
        if ctx.review_mode and ctx.review_store is not None:
            item = ctx.review_store.enqueue(instance)
            response["review_item_id"] = item.item_id
        return response

    @app.post("/v1/retrieve")
    def retrieve_endpoint(body: dict):
        _require(ctx.retriever is not None, "no retrieval index loaded", status=409)
        question, options = _parse_question_options(body)
        m = body.get("m", ctx.default_m)
        _require(isinstance(m, int) and m >= 1, "m must be a positive integer")
        weights = _parse_weights(body.get("weights"))
        qa = ctx.pipeline.make_context(question, options)
        try:
            demos = ctx.retriever.retrieve(qa.context_embedding, m, weights)
            prompt = build_icl_prompt(qa, demos)
        except KgExplainError as exc:
            raise _HttpError(400, str(exc)) from exc
        return {
            "demos": [
                {
                    "rank": d.rank,
                    "score": d.score,
                    "explanation_id": d.explanation_id,
                    "instance": d.instance.to_json_dict(),
                }
                for d in demos
            ],
            "prompt": prompt,
        }

    def _get_store() -> ReviewStore:
        _require(ctx.review_store is not None, "review store not configured", status=409)
        return ctx.review_store

    @app.get("/v1/review/next")
    def review_next():
        store = _get_store()
        item = store.next_pending()
        return {"item": item.to_json_dict() if item else None}

    @app.get("/v1/review/items")
    def review_items():
        store = _get_store()
        return {"items": [item.to_json_dict() for item in store.items()]}

    @app.post("/v1/review/{item_id}/scores")
    def review_scores(item_id: str, body: dict):
        store = _get_store()
        scores = _parse_likert_body(body)
        try:
            with store.item_lock(item_id):
                item = store.submit_scores(item_id, scores)
        except UnknownItem as exc:
            raise _HttpError(404, str(exc)) from exc
        except IllegalTransition as exc:
            raise _HttpError(409, str(exc)) from exc
        return {"item": item.to_json_dict()}

    def _regenerate(item_id: str) -> None:
        store = ctx.review_store
        with store.item_lock(item_id):
            item = store.get(item_id)
            if item.status != "flagged":
                return  # someone else already handled it
            try:
                outcome = explain_mod.refine(
                    item.instance,
                    review_flags=list(item.flags),
                    client=ctx.pipeline.llm_client,
                    revision=item.revision,
                    max_refinements=store.max_refinements,
                    task_type=ctx.pipeline.task_type,
                )
                refined = outcome.instance
                score = score_instance(refined, ctx.pipeline.debugger_client)
                refined.debugger_score = render_scores(score)
                store.complete_regeneration(item_id, refined)
            except KgExplainError:
                logger.exception("regeneration of %s failed; item stays flagged", item_id)

    @app.post("/v1/review/{item_id}/flag")
    def review_flag(item_id: str, body: dict, background: BackgroundTasks):
        store = _get_store()
        _require(isinstance(body, dict), "body must be a JSON object")
        note = body.get("note")
        _require(isinstance(note, str) and note.strip() != "", "note must be a nonempty string")
        try:
            with store.item_lock(item_id):
                item, should_regenerate = store.flag(item_id, note.strip())
        except UnknownItem as exc:
            raise _HttpError(404, str(exc)) from exc
        except IllegalTransition as exc:
            raise _HttpError(409, str(exc)) from exc
        if should_regenerate:
            background.add_task(_regenerate, item_id)
        return {"item": item.to_json_dict()}

    return app
