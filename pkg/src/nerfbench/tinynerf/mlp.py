"""Fully connected ReLU network mapping encoded positions to raw (r, g, b, sigma)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..rng import STREAM_INIT, make_rng
from .encoding import EncodingConfig

HIDDEN = (256, 256, 256, 256, 256, 256, 64)
N_OUT = 4


class NonFiniteActivation(FloatingPointError):
    pass


@dataclass
class MlpModel:
    encoding: EncodingConfig
    layers: list = field(default_factory=list)   # [(W (in, out), b (out,)), ...]

    def __post_init__(self):
        prev = self.encoding.dim
        for i, (w, b) in enumerate(self.layers):
            if w.shape[0] != prev or b.shape != (w.shape[1],):
                raise ValueError(f"layer {i}: shapes {w.shape}/{b.shape} break the chain at width {prev}")
            prev = w.shape[1]
        if self.layers and prev != N_OUT:
            raise ValueError(f"output width must be {N_OUT}, got {prev}")

    @property
    def widths(self) -> list:
        return [self.encoding.dim] + [w.shape[1] for w, _ in self.layers]

    @property
    def dtype(self):
        return self.layers[0][0].dtype

    def param_count(self) -> int:
        return sum(w.size + b.size for w, b in self.layers)

    def params(self) -> list:
        """Flat list of parameter arrays in (W0, b0, W1, b1, ...) order."""
        return [a for wb in self.layers for a in wb]

    def copy(self) -> "MlpModel":
        return MlpModel(self.encoding, [(w.copy(), b.copy()) for w, b in self.layers])


def mlp_init(cfg: EncodingConfig, seed: int, hidden=HIDDEN, dtype=np.float32) -> MlpModel:
    """Glorot-uniform weights and zero biases drawn from the seed's init stream."""
    rng = make_rng(seed, STREAM_INIT)
    widths = [cfg.dim, *hidden, N_OUT]
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-lim, lim, size=(fan_in, fan_out)).astype(dtype)
        layers.append((w, np.zeros(fan_out, dtype=dtype)))
    return MlpModel(cfg, layers)


def mlp_forward(model: MlpModel, x: np.ndarray):
    """Returns the raw (n, 4) head output and the per-layer inputs for backward."""
    acts = [x]
    h = x
    last = len(model.layers) - 1
    # overflow is reported below as NonFiniteActivation, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for i, (w, b) in enumerate(model.layers):
            h = h @ w + b
            if i < last:
                np.maximum(h, 0, out=h)
                acts.append(h)
    if not np.all(np.isfinite(h)):
        raise NonFiniteActivation("network produced non-finite outputs")
    return h, acts


def mlp_backward(model: MlpModel, acts: list, dout: np.ndarray) -> list:
    """Gradients ``[(dW, db), ...]`` given d(loss)/d(output)."""
    grads = [None] * len(model.layers)
    g = dout
    for i in range(len(model.layers) - 1, -1, -1):
        w, _ = model.layers[i]
        a = acts[i]
        grads[i] = (a.T @ g, g.sum(axis=0))
        if i > 0:
            g = g @ w.T
            # ReLU derivative; stored activations are post-ReLU
            g *= acts[i] > 0
    return grads
