from .checkpoint import CheckpointError, checkpoint_size, load_model, save_model
from .encoding import EncodingConfig, positional_encode
from .mlp import HIDDEN, MlpModel, NonFiniteActivation, mlp_backward, mlp_forward, mlp_init
from .optim import AdamState, adam_step
from .train import (HistoryEntry, TrainConfig, TrainingDiverged, backward, forward_rays,
                    loss_and_grads, loss_mse, render_view, train)
from .volume import RenderConfig, composite, composite_backward, composite_forward, sample_depths, sample_ray

__all__ = [
    "AdamState", "CheckpointError", "EncodingConfig", "HIDDEN", "HistoryEntry", "MlpModel",
    "NonFiniteActivation", "RenderConfig", "TrainConfig", "TrainingDiverged", "adam_step",
    "backward", "checkpoint_size", "composite", "composite_backward", "composite_forward",
    "forward_rays", "load_model", "loss_and_grads", "loss_mse", "mlp_backward", "mlp_forward",
    "mlp_init", "positional_encode", "render_view", "sample_depths", "sample_ray", "save_model",
    "train",
]
