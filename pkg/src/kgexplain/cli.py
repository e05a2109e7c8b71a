"""Command-line interface for the explanation engine."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dataset as dataset_mod
from . import evalkit
from . import kg as kg_mod
from .debugger import render_scores, score_instance
from .embedding import EmbeddingClientConfig, HashingEmbedder, HttpEmbedder
from .errors import KgExplainError
from .gat import (
    GatConfig,
    TrainConfig,
    extract_reason_elements,
    forward,
    init_params,
    load_checkpoint,
    make_planted_dataset,
    planted_config,
    read_examples,
    save_checkpoint,
    train,
)
from .llm import ChatClient, LlmClientConfig
from .mocks import pipeline_mock_client
from .pipeline import Pipeline
from .pruning import EmbeddingScorer, ElementGraph, HashScorer, prune_kg
from .retrieval import DemoRetriever, RetrievalIndex, SelectionWeights, build_icl_prompt


def _options_list(raw: str) -> list[str]:
    options = [o.strip() for o in raw.split(",") if o.strip()]
    if len(options) < 2:
        raise KgExplainError("provide at least 2 comma-separated options")
    return options


def _make_scorer(args) -> object:
    if args.scorer == "hash":
        return HashScorer(seed=getattr(args, "seed", 0))
    config = EmbeddingClientConfig(base_url=args.embed_base_url, model_name=args.embed_model)
    return EmbeddingScorer(HttpEmbedder(config), seed=getattr(args, "seed", 0))


def _make_llm(args):
    if getattr(args, "mock", False):
        return pipeline_mock_client()
    config = LlmClientConfig(base_url=args.llm_base_url, model_name=args.llm_model)
    return ChatClient(config)


def _make_pipeline(args) -> Pipeline:
    graph = kg_mod.load_graph(args.graph)
    params = load_checkpoint(args.model_ckpt)
    llm = _make_llm(args)
    return Pipeline(
        graph=graph,
        scorer=_make_scorer(args),
        params=params,
        llm_client=llm,
        debugger_client=llm,
        prune_budget=args.n,
        hops=args.hops,
    )


def cmd_ingest_kg(args) -> int:
    graph = kg_mod.load_triples(args.triples)
    kg_mod.save_graph(graph, args.out)
    print(f"ingested {graph.node_count} nodes, {graph.edge_count} edges, "
          f"{graph.relation_type_count} relation types -> {args.out}")
    return 0


def cmd_import_conceptnet(args) -> int:
    count = kg_mod.convert_conceptnet_csv(args.csv, args.out, language=args.language)
    print(f"wrote {count} triples -> {args.out}")
    return 0


def cmd_prune(args) -> int:
    graph = kg_mod.load_graph(args.graph)
    scorer = _make_scorer(args)
    embedder = HashingEmbedder(dimension=args.embed_dim)
    qa_text = args.question + " " + " ".join(_options_list(args.options))
    from .pruning import QAContext

    qa = QAContext(args.question, _options_list(args.options), embedder.embed(qa_text))
    eg = prune_kg(qa, graph, scorer, n=args.n, hops=args.hops)
    eg.save(args.out)
    print(f"retained {eg.node_count} nodes, {eg.edge_count} edges -> {args.out}")
    return 0


def cmd_train_gat(args) -> int:
    if args.synthetic:
        data = make_planted_dataset(seed=args.seed)
        examples, dev = data.train, data.dev
        config = planted_config(seed=args.seed)
    else:
        if not args.data:
            raise KgExplainError("provide --data or --synthetic")
        examples = read_examples(args.data, embedder=HashingEmbedder(dimension=args.lm_dim))
        dev = read_examples(args.dev_data, embedder=HashingEmbedder(dimension=args.lm_dim)) if args.dev_data else None
        first = examples[0]
        config = GatConfig(
            layers=args.layers,
            hidden=args.dim,
            message_dim=args.dim,
            node_type_count=max(first.graph.node_type_count, 1),
            relation_type_count=max(first.graph.relation_type_count, 1),
            lm_dim=len(first.qa.context_embedding),
            option_count=len(first.qa.options),
            answer_hidden=args.dim,
            dropout=args.dropout,
            seed=args.seed,
        )
    params = init_params(config)
    hyper = TrainConfig(learning_rate=args.lr, epochs=args.epochs, batch_size=args.batch, seed=args.seed)
    result = train(examples, params, hyper, dev=dev)
    for m in result.history:
        line = f"epoch {m.epoch:3d}  loss {m.loss:.4f}  acc {m.accuracy:.3f}"
        if m.dev_accuracy is not None:
            line += f"  dev_acc {m.dev_accuracy:.3f}"
        print(line)
    save_checkpoint(result.params, args.out)
    print(f"checkpoint -> {args.out}")
    return 0


def cmd_infer(args) -> int:
    params = load_checkpoint(args.model)
    eg = ElementGraph.load(args.element_graph)
    embedder = HashingEmbedder(dimension=params.config.lm_dim)
    options = _options_list(args.options)
    from .pruning import QAContext

    qa = QAContext(args.question, options, embedder.embed(args.question + " " + " ".join(options)))
    result = forward(qa, eg, params, training=False)
    elements = extract_reason_elements(result.attention, eg, n=args.elements)
    print(f"prediction: {result.distribution.predicted} ({options[result.distribution.predicted]})")
    print("probabilities: " + " ".join(f"{p:.6f}" for p in result.distribution.probabilities))
    print("elements:")
    for label, mass in elements.entries:
        print(f"  {label}\t{mass:.6f}")
    return 0


def cmd_explain(args) -> int:
    pipeline = _make_pipeline(args)
    instance = pipeline.explain(args.question, _options_list(args.options), gold=args.gold)
    line = instance.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(line + "\n")
        print(f"instance -> {args.out}")
    else:
        print(line)
    return 0


def cmd_build_index(args) -> int:
    records = dataset_mod.read_instances(args.dataset, strict=False)
    index = DemoRetriever.build_index(records)
    index.save(args.out)
    print(f"indexed {len(index)} instances (dimension {index.dimension}) -> {args.out}")
    return 0


def cmd_retrieve(args) -> int:
    records = dataset_mod.read_instances(args.dataset, strict=False)
    index = RetrievalIndex.load(args.index) if args.index else None
    retriever = DemoRetriever(records, index=index)
    weights_values = [float(x) for x in args.weights.split(",")]
    if len(weights_values) != 4:
        raise KgExplainError("weights must be 4 comma-separated numbers")
    weights = SelectionWeights(*weights_values)
    options = _options_list(args.options)
    embedder = HashingEmbedder(dimension=retriever.index.dimension)
    from .pruning import QAContext

    qa = QAContext(args.question, options, embedder.embed(args.question + " " + " ".join(options)))
    demos = retriever.retrieve(qa.context_embedding, args.m, weights)
    for demo in demos:
        print(f"#{demo.rank}  score={demo.score:.4f}  {demo.explanation_id}  {demo.instance.question[:60]}")
    print()
    print(build_icl_prompt(qa, demos))
    return 0


def cmd_debug_score(args) -> int:
    records = dataset_mod.read_instances(args.dataset, strict=False)
    client = _make_llm(args)
    scored = []
    for record in records:
        score = score_instance(record, client)
        record.debugger_score = render_scores(score)
        scored.append(record)
    dataset_mod.write_instances(args.out, scored)
    print(f"scored {len(scored)} instances -> {args.out}")
    return 0


def cmd_stats(args) -> int:
    records = dataset_mod.read_instances(args.dataset, strict=False)
    splits = None
    if args.manifest:
        with open(args.manifest, encoding="utf-8") as fh:
            manifest = json.load(fh)
        splits = dataset_mod.split_dataset(records, manifest)
    stats = dataset_mod.word_count_stats(records, splits)
    print(f"{'split':<10} {'count':>7} {'why':>8} {'why-not':>8} {'whole':>8}")
    rows = [("overall", stats.overall)] + sorted(stats.per_split.items())
    for name, s in rows:
        print(f"{name:<10} {s.count:>7} {s.mean_why:>8.2f} {s.mean_why_not:>8.2f} {s.mean_whole:>8.2f}")
    return 0


def cmd_validate(args) -> int:
    records = dataset_mod.read_instances(args.dataset, strict=False)
    bad = 0
    for i, record in enumerate(records, start=1):
        violations = dataset_mod.validate(record)
        if violations:
            bad += 1
            print(f"record {i}: {', '.join(violations)}")
    print(f"{len(records) - bad}/{len(records)} records valid")
    return 0 if bad == 0 else 1


def cmd_split(args) -> int:
    records = dataset_mod.read_instances(args.dataset, strict=False)
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    splits = dataset_mod.split_dataset(records, manifest)
    for name, subset in splits.items():
        print(f"{name}: {len(subset)}")
        if args.out_dir:
            dataset_mod.write_instances(f"{args.out_dir.rstrip('/')}/{name}.jsonl", subset)
    return 0


def cmd_eval(args) -> int:
    responses = evalkit.read_responses(args.responses)
    report = evalkit.build_report(responses)
    print(report.render_table())
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_dict(), fh, indent=2)
        print(f"report -> {args.report}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .review import ReviewStore
    from .service import ServiceContext, create_app

    args.model_ckpt = args.model
    pipeline = _make_pipeline(args)
    retriever = None
    if args.dataset:
        records = dataset_mod.read_instances(args.dataset, strict=False)
        index = RetrievalIndex.load(args.index) if args.index else None
        retriever = DemoRetriever(records, index=index)
    store = ReviewStore(args.review_store) if args.review_store else None
    ctx = ServiceContext(pipeline=pipeline, retriever=retriever, review_store=store, review_mode=store is not None)
    uvicorn.run(create_app(ctx), host=args.host, port=args.port)
    return 0


def _add_llm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--llm-base-url", default="https://api.openai.com/v1")
    p.add_argument("--llm-model", default="gpt-4-turbo")
    p.add_argument("--mock", action="store_true", help="use the deterministic offline mock LLM")


def _add_scorer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scorer", choices=["hash", "lm"], default="hash")
    p.add_argument("--embed-base-url", default="https://api.voyageai.com/v1")
    p.add_argument("--embed-model", default="voyage-large-2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgexplain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-kg", help="load a triple TSV and persist the graph index")
    p.add_argument("--triples", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest_kg)

    p = sub.add_parser("import-conceptnet", help="convert a ConceptNet CSV dump to triple TSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--language", default="en")
    p.set_defaults(func=cmd_import_conceptnet)

    p = sub.add_parser("prune", help="build the QA-conditioned element graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--options", required=True, help="comma-separated option texts")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--hops", type=int, default=2)
    p.add_argument("--embed-dim", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_scorer_flags(p)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("train-gat", help="train the graph attention reasoner")
    p.add_argument("--data", help="training examples (JSONL)")
    p.add_argument("--dev-data")
    p.add_argument("--synthetic", action="store_true", help="train on the planted-signal synthetic task")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--dim", type=int, default=200)
    p.add_argument("--lm-dim", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_gat)

    p = sub.add_parser("infer", help="run the reasoner on a stored element graph")
    p.add_argument("--model", required=True)
    p.add_argument("--element-graph", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--options", required=True)
    p.add_argument("--elements", type=int, default=50)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("explain", help="full pipeline: prune, reason, generate, score")
    p.add_argument("--model-ckpt", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--options", required=True)
    p.add_argument("--gold")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--hops", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_scorer_flags(p)
    _add_llm_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("build-index", help="build the retrieval index from a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("retrieve", help="retrieve demonstrations for a new query")
    p.add_argument("--index")
    p.add_argument("--dataset", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--options", required=True)
    p.add_argument("-m", type=int, default=3)
    p.add_argument("--weights", default="1,1,1,0")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("debug-score", help="score a dataset's explanations with the evaluator LLM")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    _add_llm_flags(p)
    p.set_defaults(func=cmd_debug_score)

    p = sub.add_parser("stats", help="word-count statistics of a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="check every record against the schema invariants")
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("split", help="partition a dataset by a question-id manifest")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("eval", help="aggregate human evaluation responses")
    p.add_argument("--responses", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--graph", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--index")
    p.add_argument("--dataset")
    p.add_argument("--review-store")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--hops", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    _add_scorer_flags(p)
    _add_llm_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KgExplainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
