"""Entropy-regularized character LM lab.

Trains tiny autoregressive models under the objective

    loss = cross_entropy - lambda * H

where H is the mean per-position predictive entropy, sweeps a small
lambda grid, samples from each checkpoint, and scores the samples with
the stylodiv command line tool (divergence against a baseline built
from the lab's own training corpus, plus lexical diversity).
"""

from .config import LabConfig, load_config
from .losses import entropy_per_position, per_position_loss, regularized_loss
from .model import CharLM, ModelConfig
from .train import TrainResult, TrainingDiverged, train
from .generate import generate_jsonl, load_checkpoint
from .sweep import LambdaOutcome, SweepResult, sweep_and_score

__all__ = [
    "CharLM",
    "LabConfig",
    "LambdaOutcome",
    "ModelConfig",
    "SweepResult",
    "TrainResult",
    "TrainingDiverged",
    "entropy_per_position",
    "generate_jsonl",
    "load_checkpoint",
    "load_config",
    "per_position_loss",
    "regularized_loss",
    "sweep_and_score",
    "train",
]
