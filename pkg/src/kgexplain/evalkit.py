"""Human-centered evaluation math: Likert normalization, per-metric
aggregation, Pearson correlation, and vanilla-vs-enhanced accuracy deltas."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from .errors import DatasetError, KgExplainError

METRIC_KEYS = (
    "overall_quality",
    "understandability",
    "trustworthiness",
    "satisfaction",
    "sufficiency",
    "completeness",
    "accuracy",
)
LIKERT_LEVELS = (1, 2, 3)


@dataclass
class LikertResponse:
    """One evaluator's seven three-point judgments of one instance."""

    evaluator: str
    instance: str
    answers: dict[str, int]

    def __post_init__(self) -> None:
        missing = [k for k in METRIC_KEYS if k not in self.answers]
        if missing:
            raise KgExplainError(f"missing metrics: {', '.join(missing)}")
        for key, value in self.answers.items():
            if key not in METRIC_KEYS:
                raise KgExplainError(f"unknown metric {key!r}")
            if value not in LIKERT_LEVELS:
                raise KgExplainError(f"metric {key!r} value {value!r} outside {{1,2,3}}")


def normalize_likert(value: int) -> float:
    """Map the three-point scale onto [0, 1]: 1 -> 0, 2 -> 0.5, 3 -> 1."""
    if value not in LIKERT_LEVELS:
        raise KgExplainError(f"Likert value {value!r} outside {{1,2,3}}")
    return (value - 1) / 2.0


@dataclass
class MetricAggregate:
    mean: float
    variance: float  # population variance over normalized values
    median: float
    count: int


def aggregate(responses: list[LikertResponse], metric: str) -> MetricAggregate:
    """Mean, population variance, and median of a metric's normalized values."""
    if metric not in METRIC_KEYS:
        raise KgExplainError(f"unknown metric {metric!r}")
    values = [normalize_likert(r.answers[metric]) for r in responses]
    if not values:
        raise KgExplainError(f"no responses carry metric {metric!r}")
    n = len(values)
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / n
    ordered = sorted(values)
    mid = n // 2
    median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0
    return MetricAggregate(mean=mean, variance=variance, median=median, count=n)


def pearson(x: list[float], y: list[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(x) != len(y):
        raise KgExplainError("series lengths differ")
    if len(x) < 2:
        raise KgExplainError("need at least 2 points")
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise KgExplainError("zero variance in one of the series")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


@dataclass
class ModelAccuracy:
    vanilla: float
    enhanced: float
    delta: float


@dataclass
class AccuracyComparison:
    per_model: dict[str, ModelAccuracy]
    best_model: str
    best_delta: float


def accuracy_compare(results: dict[str, tuple[int, int, int]]) -> AccuracyComparison:
    """Per-model accuracy with and without retrieval enhancement.

    ``results`` maps model name to (vanilla correct, enhanced correct,
    total); the model with the largest delta is flagged.
    """
    if not results:
        raise KgExplainError("no model results supplied")
    per_model: dict[str, ModelAccuracy] = {}
    for model, (vanilla_correct, enhanced_correct, total) in results.items():
        if total <= 0:
            raise KgExplainError(f"model {model!r} has a non-positive total")
        vanilla = vanilla_correct / total
        enhanced = enhanced_correct / total
        per_model[model] = ModelAccuracy(vanilla=vanilla, enhanced=enhanced, delta=enhanced - vanilla)
    best_model = max(sorted(per_model), key=lambda name: per_model[name].delta)
    return AccuracyComparison(per_model=per_model, best_model=best_model, best_delta=per_model[best_model].delta)


@dataclass
class EvalReport:
    metrics: dict[str, MetricAggregate] = field(default_factory=dict)
    correlations: dict[str, float] = field(default_factory=dict)
    accuracy: AccuracyComparison | None = None

    def to_json_dict(self) -> dict:
        doc: dict = {
            "metrics": {
                name: {"mean": agg.mean, "variance": agg.variance, "median": agg.median, "count": agg.count}
                for name, agg in self.metrics.items()
            },
            "correlations": self.correlations,
        }
        if self.accuracy:
            doc["accuracy"] = {
                model: {"vanilla": acc.vanilla, "enhanced": acc.enhanced, "delta": acc.delta}
                for model, acc in self.accuracy.per_model.items()
            }
            doc["best_model"] = self.accuracy.best_model
        return doc

    def render_table(self) -> str:
        lines = [f"{'metric':<20} {'mean':>6} {'var':>6} {'median':>6} {'n':>5}"]
        for name, agg in self.metrics.items():
            lines.append(f"{name:<20} {agg.mean:>6.2f} {agg.variance:>6.2f} {agg.median:>6.2f} {agg.count:>5}")
        for pair, rho in self.correlations.items():
            lines.append(f"pearson({pair}) = {rho:.2f}")
        return "\n".join(lines)


DEFAULT_CORRELATION_PAIRS = (
    ("trustworthiness", "understandability"),
    ("accuracy", "trustworthiness"),
)


def build_report(
    responses: list[LikertResponse],
    correlation_pairs: tuple[tuple[str, str], ...] = DEFAULT_CORRELATION_PAIRS,
) -> EvalReport:
    """Aggregate every metric and correlate per-instance metric means."""
    if not responses:
        raise KgExplainError("no responses to report on")
    report = EvalReport()
    for metric in METRIC_KEYS:
        report.metrics[metric] = aggregate(responses, metric)

    by_instance: dict[str, list[LikertResponse]] = {}
    for r in responses:
        by_instance.setdefault(r.instance, []).append(r)
    for a, b in correlation_pairs:
        xs, ys = [], []
        for rs in by_instance.values():
            xs.append(sum(normalize_likert(r.answers[a]) for r in rs) / len(rs))
            ys.append(sum(normalize_likert(r.answers[b]) for r in rs) / len(rs))
        try:
            report.correlations[f"{a}~{b}"] = pearson(xs, ys)
        except KgExplainError:
            pass  # degenerate fixtures (constant series) simply omit the pair
    return report


def read_responses(path: str | os.PathLike) -> list[LikertResponse]:
    """Read line-delimited responses: {evaluator, instance, <7 metric keys>}."""
    out: list[LikertResponse] = []
    with open(os.fspath(path), encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON: {exc}", line_no) from exc
            if "evaluator" not in doc or "instance" not in doc:
                raise DatasetError("missing evaluator/instance", line_no)
            answers = doc.get("answers")
            if answers is None:
                answers = {k: v for k, v in doc.items() if k in METRIC_KEYS}
            try:
                out.append(LikertResponse(str(doc["evaluator"]), str(doc["instance"]), answers))
            except KgExplainError as exc:
                raise DatasetError(str(exc), line_no) from exc
    return out
