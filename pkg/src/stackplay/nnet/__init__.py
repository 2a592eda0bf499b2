"""Minimal float64 neural-network engine."""

from .gradcheck import grad_check
from .layers import Conv1D, Dense, Flatten, kaiming_uniform
from .network import Network, cross_entropy, dense_stack, softmax
from .training import Adam, History, TrainConfig, TrainingDiverged, train, train_with_lr_grid

__all__ = [
    "Adam", "Conv1D", "Dense", "Flatten", "History", "Network", "TrainConfig",
    "TrainingDiverged", "cross_entropy", "dense_stack", "grad_check",
    "kaiming_uniform", "softmax", "train", "train_with_lr_grid",
]
