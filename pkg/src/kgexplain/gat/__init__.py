"""Graph attention reasoner: model, training, and synthetic task."""

from .model import (
    AnswerDistribution,
    AttentionMap,
    ForwardResult,
    GatConfig,
    GatParams,
    GraphTensors,
    NodeStates,
    ReasonElements,
    attention_layer,
    backward,
    extract_reason_elements,
    forward,
    init_params,
    initial_states,
    layer_forward,
    load_checkpoint,
    node_attention_mass,
    relation_embed,
    save_checkpoint,
    segment_softmax,
)
from .synth import PlantedDataset, make_planted_dataset, planted_config
from .training import (
    Example,
    EpochMetrics,
    RAdam,
    TrainConfig,
    TrainResult,
    evaluate,
    grad_check,
    read_examples,
    train,
    write_examples,
)

__all__ = [
    "AnswerDistribution",
    "AttentionMap",
    "Example",
    "EpochMetrics",
    "ForwardResult",
    "GatConfig",
    "GatParams",
    "GraphTensors",
    "NodeStates",
    "PlantedDataset",
    "RAdam",
    "ReasonElements",
    "TrainConfig",
    "TrainResult",
    "attention_layer",
    "backward",
    "evaluate",
    "extract_reason_elements",
    "forward",
    "grad_check",
    "init_params",
    "initial_states",
    "layer_forward",
    "load_checkpoint",
    "make_planted_dataset",
    "node_attention_mass",
    "planted_config",
    "read_examples",
    "relation_embed",
    "save_checkpoint",
    "segment_softmax",
    "train",
    "write_examples",
]
