"""Graph attention network over an element graph, in plain numpy.

The forward pass follows, per layer: per-edge attention logits from a
single-head feed-forward scorer with a tanh squash, softmax-normalized over
each node's neighborhood with max-subtraction; messages from a one-hidden-
layer perceptron over (neighbor state, receiver node-type one-hot, relation
embedding), linearly mapped, attention-weighted, aggregated, passed through
a ramp activation, and added residually to the previous state. Answer
logits come from an MLP over (LM context vector, attention-mass-weighted
mean of the final node states, sorted top-P node-mass vector).

Everything is float64 and deterministic; gradients are computed by a
hand-written reverse pass so they can be validated against central finite
differences.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import ConfigurationError, KgExplainError, NumericalError
from ..pruning import ElementGraph, QAContext

CHECKPOINT_FORMAT = "gat-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class GatConfig:
    layers: int = 5
    hidden: int = 200
    message_dim: int = 200
    relation_dim: int = 32
    node_type_count: int = 3
    relation_type_count: int = 8
    lm_dim: int = 256
    option_count: int = 5
    answer_hidden: int = 200
    pool_size: int = 16
    dropout: float = 0.2
    activation: str = "relu"  # "identity" turns every ramp into a pass-through
    seed: int = 0

    def validate(self) -> None:
        if self.layers < 1:
            raise ConfigurationError("need at least one layer")
        if self.activation not in ("relu", "identity"):
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError("dropout must lie in [0, 1)")


class GatParams:
    """Named parameter tensors plus the configuration that shaped them."""

    def __init__(self, config: GatConfig, tensors: dict[str, np.ndarray]):
        config.validate()
        self.config = config
        self.tensors = tensors

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def check_finite(self) -> None:
        for name, t in self.tensors.items():
            if not np.all(np.isfinite(t)):
                raise NumericalError(f"parameter {name} contains non-finite values")

    def copy(self) -> "GatParams":
        return GatParams(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}

    @property
    def names(self) -> list[str]:
        return sorted(self.tensors)


def init_params(config: GatConfig) -> GatParams:
    """Seeded Glorot-style initialization; biases start at zero."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    c = config
    msg_in = c.hidden + c.node_type_count + c.relation_dim
    ans_in = c.lm_dim + c.hidden + c.pool_size

    def glorot(fan_in: int, fan_out: int, shape: tuple[int, ...]) -> np.ndarray:
        scale = np.sqrt(2.0 / (fan_in + fan_out))
        return rng.standard_normal(shape) * scale

    t: dict[str, np.ndarray] = {
        "input.W": glorot(c.node_type_count + 1, c.hidden, (c.node_type_count + 1, c.hidden)),
        "input.b": np.zeros(c.hidden),
        "rel.rel": glorot(c.relation_type_count, c.relation_dim, (c.relation_type_count, c.relation_dim)),
        "rel.type_i": glorot(c.node_type_count, c.relation_dim, (c.node_type_count, c.relation_dim)),
        "rel.type_j": glorot(c.node_type_count, c.relation_dim, (c.node_type_count, c.relation_dim)),
        "rel.b": np.zeros(c.relation_dim),
        "answer.W1": glorot(ans_in, c.answer_hidden, (ans_in, c.answer_hidden)),
        "answer.b1": np.zeros(c.answer_hidden),
        "answer.W2": glorot(c.answer_hidden, c.option_count, (c.answer_hidden, c.option_count)),
        "answer.b2": np.zeros(c.option_count),
    }
    for k in range(c.layers):
        t[f"layer{k}.att_i"] = rng.standard_normal(c.hidden) / np.sqrt(c.hidden)
        t[f"layer{k}.att_j"] = rng.standard_normal(c.hidden) / np.sqrt(c.hidden)
        t[f"layer{k}.att_b"] = np.zeros(1)
        t[f"layer{k}.msg_W"] = glorot(msg_in, c.message_dim, (msg_in, c.message_dim))
        t[f"layer{k}.msg_b"] = np.zeros(c.message_dim)
        t[f"layer{k}.W"] = glorot(c.message_dim, c.hidden, (c.message_dim, c.hidden))
    return GatParams(config, t)


def save_checkpoint(params: GatParams, path: str | os.PathLike) -> None:
    path = os.fspath(path)
    header = {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION, "config": asdict(params.config)}
    buf = io.BytesIO()
    np.savez(buf, __header__=np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8), **params.tensors)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)


def load_checkpoint(path: str | os.PathLike) -> GatParams:
    with np.load(os.fspath(path)) as data:
        header = json.loads(bytes(data["__header__"]).decode("utf-8"))
        if header.get("format") != CHECKPOINT_FORMAT:
            raise KgExplainError(f"{path}: not a {CHECKPOINT_FORMAT} file")
        if header.get("version") != CHECKPOINT_VERSION:
            raise KgExplainError(f"{path}: unsupported checkpoint version")
        config = GatConfig(**header["config"])
        tensors = {k: data[k].astype(np.float64) for k in data.files if k != "__header__"}
    return GatParams(config, tensors)


@dataclass
class GraphTensors:
    """Flattened message arrays for one element graph.

    Each stored edge yields two messages (one per direction); ``recv`` is
    the node whose state is being updated and ``send`` the neighbor it
    attends to. ``rel`` carries the stored relation type either way.
    """

    node_count: int
    recv: np.ndarray
    send: np.ndarray
    rel: np.ndarray
    node_types: np.ndarray
    relevance: np.ndarray

    @classmethod
    def from_element_graph(cls, eg: ElementGraph) -> "GraphTensors":
        if eg.node_count == 0:
            raise KgExplainError("element graph has no nodes")
        recv, send, rel = [], [], []
        for e in eg.edges:
            recv.append(e.src)
            send.append(e.dst)
            rel.append(e.rel)
            recv.append(e.dst)
            send.append(e.src)
            rel.append(e.rel)
        return cls(
            node_count=eg.node_count,
            recv=np.asarray(recv, dtype=np.int64),
            send=np.asarray(send, dtype=np.int64),
            rel=np.asarray(rel, dtype=np.int64),
            node_types=np.asarray(eg.node_types, dtype=np.int64),
            relevance=np.asarray(eg.relevance, dtype=np.float64),
        )

    @property
    def message_count(self) -> int:
        return int(self.recv.shape[0])


class AttentionMap:
    """Per-layer edge attention coefficients keyed by (receiver, sender)."""

    def __init__(self, node_count: int, layers: list[tuple[np.ndarray, np.ndarray, np.ndarray]]):
        self.node_count = node_count
        self.layers = layers

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    def as_pairs(self, layer: int) -> dict[tuple[int, int], float]:
        recv, send, alpha = self.layers[layer]
        return {(int(i), int(j)): float(a) for i, j, a in zip(recv, send, alpha)}

    def row_sums(self, layer: int) -> dict[int, float]:
        recv, _, alpha = self.layers[layer]
        sums = np.zeros(self.node_count)
        np.add.at(sums, recv, alpha)
        return {int(i): float(sums[i]) for i in np.unique(recv)}

    def node_mass(self) -> np.ndarray:
        """Final-layer incoming attention mass per node, normalized to sum 1."""
        recv, send, alpha = self.layers[-1]
        mass, _, _ = node_attention_mass(send, alpha, self.node_count)
        return mass


def node_attention_mass(send: np.ndarray, alpha: np.ndarray, node_count: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Normalized attention mass received by each node at one layer.

    Returns (normalized mass, raw mass, normalizer). An edgeless graph has
    no attention at all and degenerates to the uniform distribution.
    """
    raw = np.zeros(node_count)
    if send.size:
        np.add.at(raw, send, alpha)
    tot = float(raw.sum())
    if tot <= 0.0:
        return np.full(node_count, 1.0 / node_count), raw, 0.0
    return raw / tot, raw, tot


@dataclass
class AnswerDistribution:
    probabilities: np.ndarray
    predicted: int

    def check_invariants(self) -> None:
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-9:
            raise NumericalError("answer probabilities do not sum to 1")
        if not np.all(self.probabilities > 0):
            raise NumericalError("answer probabilities must be strictly positive")


@dataclass
class NodeStates:
    layers: list[np.ndarray]

    @property
    def final(self) -> np.ndarray:
        return self.layers[-1]


@dataclass
class ReasonElements:
    """Node labels ranked by final-layer attention mass, highest first."""

    entries: list[tuple[str, float]]

    @property
    def top5(self) -> list[tuple[str, float]]:
        return self.entries[:5]

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.entries]


@dataclass
class ForwardResult:
    distribution: AnswerDistribution
    states: NodeStates
    attention: AttentionMap
    cache: dict = field(repr=False, default_factory=dict)


def relation_embed(params: GatParams, u_i: int, u_j: int, relation_type: int) -> np.ndarray:
    """Embedding of one typed connection from the relation embedder."""
    c = params.config
    if not 0 <= u_i < c.node_type_count or not 0 <= u_j < c.node_type_count:
        raise KgExplainError("node type index out of range")
    if not 0 <= relation_type < c.relation_type_count:
        raise KgExplainError("relation type index out of range")
    return params["rel.rel"][relation_type] + params["rel.type_i"][u_i] + params["rel.type_j"][u_j] + params["rel.b"]


def _relation_features(params: GatParams, g: GraphTensors) -> np.ndarray:
    if g.message_count == 0:
        return np.zeros((0, params.config.relation_dim))
    return (
        params["rel.rel"][g.rel]
        + params["rel.type_i"][g.node_types[g.recv]]
        + params["rel.type_j"][g.node_types[g.send]]
        + params["rel.b"]
    )


def segment_softmax(logits: np.ndarray, groups: np.ndarray, num_groups: int) -> np.ndarray:
    """Softmax over each group of logits, with max-subtraction for stability."""
    if logits.size == 0:
        return logits.copy()
    gmax = np.full(num_groups, -np.inf)
    np.maximum.at(gmax, groups, logits)
    w = np.exp(logits - gmax[groups])
    z = np.zeros(num_groups)
    np.add.at(z, groups, w)
    return w / z[groups]


def initial_states(params: GatParams, g: GraphTensors) -> tuple[np.ndarray, np.ndarray]:
    """h_0: learned projection of (node-type one-hot, relevance score)."""
    c = params.config
    if int(g.node_types.max(initial=0)) >= c.node_type_count:
        raise ConfigurationError("element graph node type exceeds model node_type_count")
    x = np.zeros((g.node_count, c.node_type_count + 1))
    x[np.arange(g.node_count), g.node_types] = 1.0
    x[:, -1] = g.relevance
    return x @ params["input.W"] + params["input.b"], x


def _attention(params: GatParams, g: GraphTensors, h: np.ndarray, layer: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-message attention: tanh-squashed pairwise scores, softmax per receiver."""
    e = np.tanh(
        h[g.recv] @ params[f"layer{layer}.att_i"]
        + h[g.send] @ params[f"layer{layer}.att_j"]
        + params[f"layer{layer}.att_b"][0]
    )
    alpha = segment_softmax(e, g.recv, g.node_count)
    return e, alpha


def attention_layer(h: np.ndarray, eg: ElementGraph, params: GatParams, layer: int) -> AttentionMap:
    """Attention coefficients one layer would assign to the given states."""
    if not np.all(np.isfinite(h)):
        raise NumericalError("node states are not finite")
    g = GraphTensors.from_element_graph(eg)
    _, alpha = _attention(params, g, np.asarray(h, dtype=np.float64), layer)
    return AttentionMap(g.node_count, [(g.recv, g.send, alpha)])


def _activation(params: GatParams, pre: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if params.config.activation == "identity":
        return pre, np.ones_like(pre)
    mask = (pre > 0).astype(np.float64)
    return pre * mask, mask


def _layer(
    params: GatParams,
    g: GraphTensors,
    h: np.ndarray,
    r: np.ndarray,
    layer: int,
    training: bool,
    rng: np.random.Generator | None,
) -> tuple[np.ndarray, dict]:
    c = params.config
    e, alpha = _attention(params, g, h, layer)
    n, m = g.node_count, g.message_count

    if m:
        z = np.zeros((m, c.hidden + c.node_type_count + c.relation_dim))
        z[:, : c.hidden] = h[g.send]
        z[np.arange(m), c.hidden + g.node_types[g.recv]] = 1.0
        z[:, c.hidden + c.node_type_count :] = r
        fpre = z @ params[f"layer{layer}.msg_W"] + params[f"layer{layer}.msg_b"]
        f, fmask = _activation(params, fpre)
        gmsg = f @ params[f"layer{layer}.W"]
        agg = np.zeros((n, c.hidden))
        np.add.at(agg, g.recv, alpha[:, None] * gmsg)
    else:
        z = f = fmask = gmsg = None
        agg = np.zeros((n, c.hidden))

    dropscale = None
    if training and c.dropout > 0.0:
        if rng is None:
            raise ConfigurationError("training forward pass needs an RNG for dropout")
        keep = (rng.random(agg.shape) >= c.dropout).astype(np.float64)
        dropscale = keep / (1.0 - c.dropout)
        agg = agg * dropscale

    act, actmask = _activation(params, agg)
    h_next = act + h
    if not np.all(np.isfinite(h_next)):
        raise NumericalError(f"non-finite node states after layer {layer}")
    cache = {
        "h": h, "e": e, "alpha": alpha, "z": z, "f": f, "fmask": fmask,
        "gmsg": gmsg, "actmask": actmask, "dropscale": dropscale,
    }
    return h_next, cache


def layer_forward(
    h: np.ndarray,
    eg: ElementGraph,
    params: GatParams,
    layer: int,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """One attention/update layer applied to explicit node states."""
    g = GraphTensors.from_element_graph(eg)
    r = _relation_features(params, g)
    h_next, _ = _layer(params, g, np.asarray(h, dtype=np.float64), r, layer, training, rng)
    return h_next


def forward(
    qa: QAContext,
    eg: ElementGraph,
    params: GatParams,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> ForwardResult:
    """Run all layers, pool, and score the answer options.

    In inference mode (``training=False``) the pass is fully deterministic:
    identical inputs produce bitwise-identical outputs.
    """
    c = params.config
    if len(qa.options) != c.option_count:
        raise ConfigurationError(
            f"model scores {c.option_count} options but the question has {len(qa.options)}"
        )
    if qa.context_embedding.shape != (c.lm_dim,):
        raise ConfigurationError(
            f"context embedding has dimension {qa.context_embedding.shape[0]}, model expects {c.lm_dim}"
        )

    g = GraphTensors.from_element_graph(eg)
    r = _relation_features(params, g)
    h, x = initial_states(params, g)
    states = [h]
    layer_caches = []
    att_layers = []
    for k in range(c.layers):
        h, cache = _layer(params, g, h, r, k, training, rng)
        states.append(h)
        layer_caches.append(cache)
        att_layers.append((g.recv, g.send, cache["alpha"]))

    final_alpha = layer_caches[-1]["alpha"]
    mass, raw, tot = node_attention_mass(g.send, final_alpha, g.node_count)
    pooled_h = mass @ h

    order = np.argsort(-mass, kind="stable")
    npad = min(c.pool_size, g.node_count)
    pool_m = np.zeros(c.pool_size)
    pool_m[:npad] = mass[order[:npad]]

    zfull = np.concatenate([qa.context_embedding, pooled_h, pool_m])
    hid_pre = zfull @ params["answer.W1"] + params["answer.b1"]
    hid, hid_mask = _activation(params, hid_pre)
    logits = hid @ params["answer.W2"] + params["answer.b2"]
    if not np.all(np.isfinite(logits)):
        raise NumericalError("non-finite answer logits")
    shifted = logits - logits.max()
    expl = np.exp(shifted)
    probs = expl / expl.sum()

    dist = AnswerDistribution(probabilities=probs, predicted=int(np.argmax(probs)))
    dist.check_invariants()
    cache = {
        "tensors": g, "x": x, "states": states, "layers": layer_caches, "r": r,
        "mass": mass, "raw": raw, "tot": tot, "order": order, "npad": npad,
        "pooled_h": pooled_h, "pool_m": pool_m, "zfull": zfull,
        "hid": hid, "hid_mask": hid_mask, "logits": logits, "probs": probs,
        "training": training,
    }
    return ForwardResult(
        distribution=dist,
        states=NodeStates(states),
        attention=AttentionMap(g.node_count, att_layers),
        cache=cache,
    )


def backward(params: GatParams, result: ForwardResult, gold: int) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy loss for the gold option plus gradients for every tensor."""
    c = params.config
    cache = result.cache
    g: GraphTensors = cache["tensors"]
    probs = cache["probs"]
    if not 0 <= gold < c.option_count:
        raise KgExplainError(f"gold option index {gold} out of range")
    loss = -float(np.log(probs[gold]))

    grads = params.zeros_like()
    dlogits = probs.copy()
    dlogits[gold] -= 1.0

    hid, zfull = cache["hid"], cache["zfull"]
    grads["answer.W2"] += np.outer(hid, dlogits)
    grads["answer.b2"] += dlogits
    dhid = params["answer.W2"] @ dlogits
    dhpre = dhid * cache["hid_mask"]
    grads["answer.W1"] += np.outer(zfull, dhpre)
    grads["answer.b1"] += dhpre
    dz = params["answer.W1"] @ dhpre
    dpooled_h = dz[c.lm_dim : c.lm_dim + c.hidden]
    dpool_m = dz[c.lm_dim + c.hidden :]

    mass, order, npad = cache["mass"], cache["order"], cache["npad"]
    h_final = cache["states"][-1]
    dmass = np.zeros(g.node_count)
    dmass[order[:npad]] += dpool_m[:npad]
    dmass += h_final @ dpooled_h
    dh = np.outer(mass, dpooled_h)

    dalpha_final = None
    if cache["tot"] > 0.0:
        centered = (dmass - float(dmass @ mass)) / cache["tot"]
        dalpha_final = centered[g.send]

    dr = np.zeros((g.message_count, c.relation_dim))
    for k in reversed(range(c.layers)):
        lc = cache["layers"][k]
        h_k = lc["h"]
        dact = dh
        dh_prev = dh.copy()
        dagg = dact * lc["actmask"]
        if lc["dropscale"] is not None:
            dagg = dagg * lc["dropscale"]

        if g.message_count:
            alpha, e = lc["alpha"], lc["e"]
            dq = dagg[g.recv]
            dalpha = np.einsum("md,md->m", dq, lc["gmsg"])
            if k == c.layers - 1 and dalpha_final is not None:
                dalpha = dalpha + dalpha_final
            dgmsg = alpha[:, None] * dq
            grads[f"layer{k}.W"] += lc["f"].T @ dgmsg
            df = dgmsg @ params[f"layer{k}.W"].T
            dfpre = df * lc["fmask"]
            grads[f"layer{k}.msg_W"] += lc["z"].T @ dfpre
            grads[f"layer{k}.msg_b"] += dfpre.sum(axis=0)
            dzmat = dfpre @ params[f"layer{k}.msg_W"].T
            np.add.at(dh_prev, g.send, dzmat[:, : c.hidden])
            dr += dzmat[:, c.hidden + c.node_type_count :]

            s = np.zeros(g.node_count)
            np.add.at(s, g.recv, dalpha * alpha)
            de = alpha * (dalpha - s[g.recv])
            dt = de * (1.0 - e * e)
            grads[f"layer{k}.att_i"] += (h_k[g.recv] * dt[:, None]).sum(axis=0)
            grads[f"layer{k}.att_j"] += (h_k[g.send] * dt[:, None]).sum(axis=0)
            grads[f"layer{k}.att_b"] += dt.sum()
            np.add.at(dh_prev, g.recv, dt[:, None] * params[f"layer{k}.att_i"])
            np.add.at(dh_prev, g.send, dt[:, None] * params[f"layer{k}.att_j"])
        else:
            if k == c.layers - 1 and dalpha_final is not None:
                raise KgExplainError("attention gradient on an edgeless graph")
        dh = dh_prev

    if g.message_count:
        np.add.at(grads["rel.rel"], g.rel, dr)
        np.add.at(grads["rel.type_i"], g.node_types[g.recv], dr)
        np.add.at(grads["rel.type_j"], g.node_types[g.send], dr)
        grads["rel.b"] += dr.sum(axis=0)

    grads["input.W"] += cache["x"].T @ dh
    grads["input.b"] += dh.sum(axis=0)
    return loss, grads


def extract_reason_elements(att: AttentionMap, eg: ElementGraph, n: int = 50) -> ReasonElements:
    """Rank nodes by final-layer attention mass; ties go to the lower node id."""
    if eg.node_count == 0:
        raise KgExplainError("cannot extract reason elements from an empty graph")
    if att.node_count != eg.node_count:
        raise KgExplainError("attention map does not match the element graph")
    mass = att.node_mass()
    order = sorted(range(eg.node_count), key=lambda i: (-mass[i], i))
    keep = order[: min(n, eg.node_count)]
    return ReasonElements(entries=[(eg.labels[i], float(mass[i])) for i in keep])
