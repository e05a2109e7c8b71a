"""Training loop (RAdam + backprop), evaluation, and finite-difference checks."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import KgExplainError, NumericalError
from ..pruning import ElementGraph, QAContext
from .model import GatParams, backward, forward


@dataclass
class Example:
    """One supervised instance: a QA context, its element graph, gold index."""

    qa: QAContext
    graph: ElementGraph
    gold: int


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 64
    seed: int = 0
    early_stop_dev_accuracy: float | None = None


@dataclass
class EpochMetrics:
    epoch: int
    loss: float
    accuracy: float
    dev_loss: float | None = None
    dev_accuracy: float | None = None


@dataclass
class TrainResult:
    params: GatParams
    history: list[EpochMetrics] = field(default_factory=list)

    @property
    def final(self) -> EpochMetrics:
        return self.history[-1]


class RAdam:
    """Rectified Adam: warms up without adaptive scaling while the variance
    of the second moment is intractable (rho <= 4), then switches to the
    variance-rectified adaptive step."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.rho_inf = 2.0 / (1.0 - beta2) - 1.0

    def step(self, tensors: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        t = self.t
        b1, b2 = self.beta1, self.beta2
        rho = self.rho_inf - 2.0 * t * b2**t / (1.0 - b2**t)
        if rho > 4.0:
            r = math.sqrt(
                ((rho - 4.0) * (rho - 2.0) * self.rho_inf)
                / ((self.rho_inf - 4.0) * (self.rho_inf - 2.0) * rho)
            )
        else:
            r = None
        for name, w in tensors.items():
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(w))
            v = self.v.setdefault(name, np.zeros_like(w))
            m += (1.0 - b1) * (g - m)
            v += (1.0 - b2) * (g * g - v)
            m_hat = m / (1.0 - b1**t)
            if r is not None:
                v_hat = np.sqrt(v / (1.0 - b2**t))
                w -= self.lr * r * m_hat / (v_hat + self.eps)
            else:
                w -= self.lr * m_hat


def evaluate(params: GatParams, examples: list[Example]) -> tuple[float, float]:
    """Mean cross-entropy loss and accuracy in inference mode."""
    if not examples:
        raise KgExplainError("cannot evaluate on an empty example list")
    total_loss = 0.0
    correct = 0
    for ex in examples:
        result = forward(ex.qa, ex.graph, params, training=False)
        total_loss += -float(np.log(result.cache["probs"][ex.gold]))
        correct += int(result.distribution.predicted == ex.gold)
    return total_loss / len(examples), correct / len(examples)


def train(
    dataset: list[Example],
    params: GatParams,
    hyper: TrainConfig,
    dev: list[Example] | None = None,
) -> TrainResult:
    """Minimize mean cross-entropy over the dataset with RAdam.

    The input parameters are left untouched; a trained copy is returned.
    All randomness (shuffling, dropout masks) derives from ``hyper.seed``,
    so a fixed seed reproduces the run exactly.
    """
    if not dataset:
        raise KgExplainError("training dataset is empty")
    trained = params.copy()
    history: list[EpochMetrics] = []

    if hyper.epochs == 0:
        loss, acc = evaluate(trained, dataset)
        dev_loss, dev_acc = evaluate(trained, dev) if dev else (None, None)
        history.append(EpochMetrics(0, loss, acc, dev_loss, dev_acc))
        return TrainResult(params=trained, history=history)

    rng = np.random.default_rng(hyper.seed)
    optimizer = RAdam(lr=hyper.learning_rate)

    for epoch in range(1, hyper.epochs + 1):
        order = rng.permutation(len(dataset))
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, len(order), hyper.batch_size):
            batch = [dataset[i] for i in order[start : start + hyper.batch_size]]
            grads = trained.zeros_like()
            for ex in batch:
                result = forward(ex.qa, ex.graph, trained, training=True, rng=rng)
                loss, g = backward(trained, result, ex.gold)
                if not math.isfinite(loss):
                    raise NumericalError(f"non-finite loss at epoch {epoch}, batch starting {start}")
                epoch_loss += loss
                epoch_correct += int(result.distribution.predicted == ex.gold)
                for name in grads:
                    grads[name] += g[name] / len(batch)
            optimizer.step(trained.tensors, grads)

        dev_loss = dev_acc = None
        if dev:
            dev_loss, dev_acc = evaluate(trained, dev)
        history.append(
            EpochMetrics(epoch, epoch_loss / len(dataset), epoch_correct / len(dataset), dev_loss, dev_acc)
        )
        if (
            hyper.early_stop_dev_accuracy is not None
            and dev_acc is not None
            and dev_acc >= hyper.early_stop_dev_accuracy
        ):
            break

    return TrainResult(params=trained, history=history)


def write_examples(path: str | os.PathLike, examples: list[Example]) -> None:
    """Persist training examples as line-delimited JSON."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for ex in examples:
            doc = {
                "question": ex.qa.question,
                "options": ex.qa.options,
                "context_embedding": [float(v) for v in ex.qa.context_embedding],
                "gold_index": ex.gold,
                "element_graph": json.loads(ex.graph.to_json()),
            }
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")
    os.replace(tmp, path)


def read_examples(path: str | os.PathLike, embedder=None) -> list[Example]:
    """Load training examples; missing context embeddings fall back to ``embedder``."""
    out: list[Example] = []
    with open(os.fspath(path), encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            embedding = doc.get("context_embedding")
            if embedding is None:
                if embedder is None:
                    raise KgExplainError(f"line {line_no}: no context embedding and no embedder supplied")
                embedding = embedder.embed(doc["question"] + " " + " ".join(doc["options"]))
            qa = QAContext(
                question=doc["question"],
                options=doc["options"],
                context_embedding=np.asarray(embedding, dtype=np.float64),
            )
            graph = ElementGraph.from_json(json.dumps(doc["element_graph"]))
            out.append(Example(qa=qa, graph=graph, gold=int(doc["gold_index"])))
    return out


def grad_check(
    params: GatParams,
    instance: Example,
    epsilon: float = 1e-5,
    sample: int = 200,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Perturbs a random sample of at least ``sample`` scalar parameters by
    +/- epsilon in inference mode (no dropout) and compares the resulting
    loss slope with the backprop gradient.
    """
    result = forward(instance.qa, instance.graph, params, training=False)
    _, analytic = backward(params, result, instance.gold)

    flat: list[tuple[str, tuple[int, ...]]] = []
    for name in params.names:
        for idx in np.ndindex(params[name].shape):
            flat.append((name, idx))
    rng = np.random.default_rng(seed)
    count = min(len(flat), max(sample, 1))
    picks = rng.choice(len(flat), size=count, replace=False)

    def loss_at(p: GatParams) -> float:
        res = forward(instance.qa, instance.graph, p, training=False)
        return -float(np.log(res.cache["probs"][instance.gold]))

    work = params.copy()
    max_rel = 0.0
    for pick in picks:
        name, idx = flat[int(pick)]
        original = work[name][idx]
        work[name][idx] = original + epsilon
        loss_plus = loss_at(work)
        work[name][idx] = original - epsilon
        loss_minus = loss_at(work)
        work[name][idx] = original
        fd = (loss_plus - loss_minus) / (2.0 * epsilon)
        ga = float(analytic[name][idx])
        denom = max(abs(fd), abs(ga))
        if denom < 1e-10:
            continue
        max_rel = max(max_rel, abs(fd - ga) / denom)
    return max_rel
