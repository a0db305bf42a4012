"""Bipartite graph variational autoencoder with its training loop and checkpoint format."""

from .checkpoint import CheckpointError, ModelCheckpoint
from .model import (
    CHANNELS,
    GraphInput,
    LatentState,
    Noise,
    NumericalError,
    Propagator,
    StepMetrics,
    TrainConfig,
    backward,
    decode,
    default_kl_coef,
    draw_noise,
    encode,
    evaluate_mse,
    forward_backward,
    gcn_inter_layer,
    gcn_intra_layer,
    init_params,
    kl_divergence,
    loss,
    loss_value,
    make_propagator,
    train_step,
)
from .train import BiGAE, edge_prediction_accuracy, embed_sentences, prepare_inputs, pretrain

__all__ = [
    "BiGAE",
    "CHANNELS",
    "CheckpointError",
    "GraphInput",
    "LatentState",
    "ModelCheckpoint",
    "Noise",
    "NumericalError",
    "Propagator",
    "StepMetrics",
    "TrainConfig",
    "backward",
    "decode",
    "default_kl_coef",
    "draw_noise",
    "edge_prediction_accuracy",
    "embed_sentences",
    "encode",
    "evaluate_mse",
    "forward_backward",
    "gcn_inter_layer",
    "gcn_intra_layer",
    "init_params",
    "kl_divergence",
    "loss",
    "loss_value",
    "make_propagator",
    "prepare_inputs",
    "pretrain",
    "train_step",
]
