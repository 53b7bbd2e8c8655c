from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlp import MlpModel


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_model(cls, model: MlpModel) -> "AdamState":
        params = model.params()
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(model: MlpModel, grads: list, state: AdamState, lr: float):
    """One bias-corrected Adam update, applied to ``model`` and ``state`` in place."""
    flat_grads = [g for gw in grads for g in gw]
    params = model.params()
    if len(flat_grads) != len(params):
        raise ValueError("gradient list does not match the model's parameters")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1 ** state.step
    corr2 = 1.0 - b2 ** state.step
    for p, g, m, v in zip(params, flat_grads, state.m, state.v):
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= (lr * (m / corr1) / (np.sqrt(v / corr2) + state.eps)).astype(p.dtype)
    return model, state
