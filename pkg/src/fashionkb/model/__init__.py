"""Contextualized fashion concept learner: autodiff core, recurrent encoders,
multi-task network, label-noise modeling, training and checkpoints."""

from .autodiff import Tensor, gradcheck, no_grad
from .checkpoint import load_checkpoint, save_checkpoint
from .network import (
    ConceptModel,
    ConceptPrediction,
    DecodedPost,
    ModelDims,
    decode,
    forward,
)
from .noise import NoiseModel, apply_noise
from .recurrent import GruCell, birnn_encode
from .train import Sgd, TrainConfig, TrainResult, backward_and_step, evaluate, loss, train

__all__ = [
    "Tensor",
    "gradcheck",
    "no_grad",
    "load_checkpoint",
    "save_checkpoint",
    "ConceptModel",
    "ConceptPrediction",
    "DecodedPost",
    "ModelDims",
    "decode",
    "forward",
    "NoiseModel",
    "apply_noise",
    "GruCell",
    "birnn_encode",
    "Sgd",
    "TrainConfig",
    "TrainResult",
    "backward_and_step",
    "evaluate",
    "loss",
    "train",
]
