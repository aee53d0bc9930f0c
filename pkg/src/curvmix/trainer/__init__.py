"""Desk-scale private training of linear and logistic models."""

from __future__ import annotations

from .data import LABEL_COLUMN, Dataset, ModelKind, load_dataset, make_synthetic_task
from .models import ModelParams, hessian_operator, per_example_gradients, per_example_losses
from .schedule import accountant_handoff, accountant_params, partition_schedule
from .train import LOG_COLUMNS, TrainConfig, clip_gradient, private_train, training_loss

__all__ = [
    "LABEL_COLUMN",
    "LOG_COLUMNS",
    "Dataset",
    "ModelKind",
    "ModelParams",
    "TrainConfig",
    "accountant_handoff",
    "accountant_params",
    "clip_gradient",
    "hessian_operator",
    "load_dataset",
    "make_synthetic_task",
    "partition_schedule",
    "per_example_gradients",
    "per_example_losses",
    "private_train",
    "training_loss",
]
