"""Rendering through the network and the training loop."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ..geometry import PinholeCamera, Transform, generate_rays
from ..metrics import psnr
from ..rng import STREAM_TRAIN, make_rng
from .encoding import EncodingConfig, positional_encode
from .mlp import MlpModel, NonFiniteActivation, mlp_backward, mlp_forward, mlp_init
from .optim import AdamState, adam_step
from .volume import RenderConfig, composite_backward, composite_forward, sample_depths

log = logging.getLogger(__name__)

# network evaluations per forward chunk; bounds activation memory
POINTS_PER_CHUNK = 1 << 15


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 2057
    learning_rate: float = 5e-4
    n_iters: int = 5000
    rays_per_batch: int | None = None     # None trains on the full image
    eval_every: int = 100
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    holdout: int | None = -1              # frame index kept out of training

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.n_iters < 0:
            raise ValueError(f"n_iters must be >= 0, got {self.n_iters}")
        if self.rays_per_batch is not None and self.rays_per_batch < 1:
            raise ValueError(f"rays_per_batch must be >= 1, got {self.rays_per_batch}")
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")


class HistoryEntry(NamedTuple):
    iteration: int
    loss: float          # held-out MSE
    psnr_db: float
    train_loss: float


class TrainingDiverged(FloatingPointError):
    def __init__(self, iteration: int, learning_rate: float, n_freqs: int):
        self.iteration = iteration
        self.learning_rate = learning_rate
        self.n_freqs = n_freqs
        super().__init__(f"non-finite loss at iteration {iteration} "
                         f"(lr={learning_rate:g}, L={n_freqs})")


def forward_rays(model: MlpModel, origins, dirs, t, delta, background, keep_cache=True):
    """Render rays through the network; returns ``(pixels (R, 3), cache)``."""
    r, n = t.shape
    pts = origins[:, None, :] + t[..., None] * dirs[:, None, :]
    x = positional_encode(pts.reshape(-1, 3), model.encoding, dtype=model.dtype)
    raw, acts = mlp_forward(model, x)
    pixel, ccache = composite_forward(raw.reshape(r, n, 4), delta.astype(model.dtype), background)
    if not keep_cache:
        return pixel, None
    return pixel, {"acts": acts, "composite": ccache}


def backward(model: MlpModel, cache: dict, dpixel: np.ndarray) -> list:
    """Parameter gradients ``[(dW, db), ...]`` given d(loss)/d(pixels)."""
    draw = composite_backward(cache["composite"], dpixel.astype(model.dtype))
    return mlp_backward(model, cache["acts"], draw.reshape(-1, 4))


def loss_mse(pred, target) -> float:
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return float(np.mean((pred.astype(np.float64) - target) ** 2))


def loss_and_grads(model: MlpModel, origins, dirs, t, delta, target, background):
    """MSE over all given rays and its exact gradient.

    Rays are processed in fixed-size chunks whose gradients are summed in
    chunk order, so the result does not depend on memory limits elsewhere.
    """
    n_rays = len(origins)
    per = max(1, POINTS_PER_CHUNK // t.shape[1])
    scale = 2.0 / (n_rays * 3)
    total = 0.0
    grads = None
    for s in range(0, n_rays, per):
        sl = slice(s, s + per)
        pixel, cache = forward_rays(model, origins[sl], dirs[sl], t[sl], delta[sl], background)
        diff = pixel.astype(np.float64) - target[sl]
        total += float(np.sum(diff * diff))
        g = backward(model, cache, scale * diff)
        if grads is None:
            grads = g
        else:
            grads = [(gw + dw, gb + db) for (gw, gb), (dw, db) in zip(grads, g)]
    return total / (n_rays * 3), grads


def render_view(model: MlpModel, cam: PinholeCamera, pose: Transform, cfg: RenderConfig,
                rng=None, background=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Render an (H, W, 3) image of the model from ``pose``."""
    origins, dirs = generate_rays(cam, pose)
    origins = origins.reshape(-1, 3)
    dirs = dirs.reshape(-1, 3)
    if cfg.white_background:
        background = (1.0, 1.0, 1.0)
    t, delta = sample_depths(len(origins), cfg, rng)
    out = np.empty((len(origins), 3))
    per = max(1, POINTS_PER_CHUNK // cfg.n_samples)
    for s in range(0, len(origins), per):
        sl = slice(s, s + per)
        out[sl], _ = forward_rays(model, origins[sl], dirs[sl], t[sl], delta[sl], background,
                                  keep_cache=False)
    return out.reshape(cam.height, cam.width, 3)


def split_holdout(n_frames: int, holdout) -> tuple[list, int | None]:
    if holdout is None or n_frames < 2:
        return list(range(n_frames)), None
    h = holdout % n_frames
    return [i for i in range(n_frames) if i != h], h


def train(dataset, train_cfg: TrainConfig, render_cfg: RenderConfig, model: MlpModel | None = None):
    """Fit a tiny-NeRF to ``dataset``; returns ``(model, history)``.

    Each iteration draws one training frame (and, in batched mode, a subset of
    its pixels) from the seed's training stream. The held-out view is rendered
    without jitter every ``eval_every`` iterations and after the last one.
    """
    cfg = train_cfg
    if len(dataset.frames) == 0:
        raise ValueError("dataset has no frames")
    if model is None:
        model = mlp_init(cfg.encoding, cfg.seed)
    history: list[HistoryEntry] = []
    if cfg.n_iters == 0:
        return model, history

    train_idx, hold = split_holdout(len(dataset.frames), cfg.holdout)
    eval_frame = dataset.frames[hold if hold is not None else train_idx[0]]
    background = (1.0, 1.0, 1.0) if render_cfg.white_background else dataset.background
    eval_cfg = replace(render_cfg, stratified=False)

    rays = {}
    for i in train_idx:
        f = dataset.frames[i]
        o, d = generate_rays(f.cam, f.pose)
        rays[i] = (o.reshape(-1, 3), d.reshape(-1, 3), f.rgb.reshape(-1, 3))

    state = AdamState.for_model(model)
    rng = make_rng(cfg.seed, STREAM_TRAIN)
    n_freqs = cfg.encoding.n_freqs
    for it in range(cfg.n_iters):
        fi = train_idx[int(rng.integers(len(train_idx)))]
        o, d, target = rays[fi]
        if cfg.rays_per_batch is not None and cfg.rays_per_batch < len(o):
            sel = rng.choice(len(o), size=cfg.rays_per_batch, replace=False)
            o, d, target = o[sel], d[sel], target[sel]
        t, delta = sample_depths(len(o), render_cfg, rng)
        try:
            loss, grads = loss_and_grads(model, o, d, t, delta, target, background)
        except NonFiniteActivation:
            raise TrainingDiverged(it, cfg.learning_rate, n_freqs) from None
        if not np.isfinite(loss) or not all(np.isfinite(g).all() for gw in grads for g in gw):
            raise TrainingDiverged(it, cfg.learning_rate, n_freqs)
        adam_step(model, grads, state, cfg.learning_rate)

        done = it + 1
        if done % cfg.eval_every == 0 or done == cfg.n_iters:
            try:
                pred = render_view(model, eval_frame.cam, eval_frame.pose, eval_cfg,
                                   background=background)
            except NonFiniteActivation:
                raise TrainingDiverged(it, cfg.learning_rate, n_freqs) from None
            m = loss_mse(pred, eval_frame.rgb)
            history.append(HistoryEntry(done, m, psnr(m), loss))
            log.info("iter %d  train %.5f  held-out %.5f  psnr %.3f dB", done, loss, m, psnr(m))
    return model, history
