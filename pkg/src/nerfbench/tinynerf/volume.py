"""Ray sampling and emission-absorption compositing, with its reverse pass."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# half-width of the sampled depth band around the unit-sphere object
DEPTH_MARGIN = 1.25


@dataclass(frozen=True)
class RenderConfig:
    n_samples: int = 64
    near: float = 6.75
    far: float = 9.25
    stratified: bool = True
    white_background: bool = False

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not self.near < self.far:
            raise ValueError(f"need near < far, got {self.near} >= {self.far}")

    @classmethod
    def around(cls, distance: float, **kw) -> "RenderConfig":
        """Depth band bracketing a unit-sphere object seen from ``distance``."""
        return cls(near=max(distance - DEPTH_MARGIN, 1e-3), far=distance + DEPTH_MARGIN, **kw)


def sample_depths(n_rays: int, cfg: RenderConfig, rng=None, dtype=np.float64):
    """Bin-jittered sample depths ``t`` and spacings ``delta``, both (n_rays, n_samples).

    Without stratification (or without an rng) every sample sits at its bin center.
    """
    n = cfg.n_samples
    if cfg.stratified and rng is not None:
        u = rng.random((n_rays, n))
    else:
        u = np.full((n_rays, n), 0.5)
    t = cfg.near + (cfg.far - cfg.near) * (np.arange(n) + u) / n
    delta = np.empty_like(t)
    delta[:, :-1] = t[:, 1:] - t[:, :-1]
    delta[:, -1] = cfg.far - t[:, -1]
    return t.astype(dtype), delta.astype(dtype)


def sample_ray(ray, cfg: RenderConfig, rng=None):
    """Sample points along one ray: ``(points (n, 3), t (n,), delta (n,))``."""
    t, delta = sample_depths(1, cfg, rng)
    t, delta = t[0], delta[0]
    return ray.origin + t[:, None] * ray.direction, t, delta


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def composite_forward(raw: np.ndarray, delta: np.ndarray, background):
    """Composite raw network outputs (R, N, 4) into pixels (R, 3).

    Returns the pixels and a cache for :func:`composite_backward`. The cache
    also carries per-sample ``weights`` and the leftover transmittance ``t_final``.
    """
    bg = np.asarray(background, dtype=raw.dtype)
    c = sigmoid(raw[..., :3])
    sig_raw = raw[..., 3]
    sigma = np.maximum(sig_raw, 0)
    tau = sigma * delta
    trans = np.exp(-tau)
    alpha = -np.expm1(-tau)
    T = np.ones_like(tau)
    if tau.shape[1] > 1:
        T[:, 1:] = np.cumprod(trans[:, :-1], axis=1)
    weights = T * alpha
    t_final = T[:, -1] * trans[:, -1]
    pixel = np.einsum("rn,rnc->rc", weights, c) + t_final[:, None] * bg
    cache = {"c": c, "sig_raw": sig_raw, "delta": delta, "T": T, "trans": trans,
             "weights": weights, "t_final": t_final, "bg": bg}
    return pixel, cache


def composite_backward(cache: dict, dpixel: np.ndarray) -> np.ndarray:
    """d(loss)/d(raw) of shape (R, N, 4) given d(loss)/d(pixel) of shape (R, 3)."""
    c, w = cache["c"], cache["weights"]
    draw = np.empty(c.shape[:2] + (4,), dtype=c.dtype)
    draw[..., :3] = w[..., None] * dpixel[:, None, :] * c * (1 - c)
    dw = np.einsum("rc,rnc->rn", dpixel, c)
    dT_final = dpixel @ cache["bg"]
    # w_i = T_i (1 - e^{-tau_i}) and T_i = exp(-sum_{j<i} tau_j):
    # dw_i/dtau_i = T_{i+1}, dw_i/dtau_k = -w_i for k < i, dT_final/dtau_k = -T_final
    dww = dw * w
    later = np.cumsum(dww[:, ::-1], axis=1)[:, ::-1] - dww
    dtau = dw * (cache["T"] * cache["trans"]) - later - (dT_final * cache["t_final"])[:, None]
    draw[..., 3] = dtau * cache["delta"] * (cache["sig_raw"] > 0)
    return draw


def composite(colors_raw, sigmas_raw, delta, background=(0.0, 0.0, 0.0)):
    """Single-ray compositing: returns ``(pixel, weights, t_final)``."""
    raw = np.concatenate([np.asarray(colors_raw, dtype=np.float64).reshape(-1, 3),
                          np.asarray(sigmas_raw, dtype=np.float64).reshape(-1, 1)], axis=1)
    pixel, cache = composite_forward(raw[None], np.asarray(delta, dtype=np.float64)[None], background)
    return pixel[0], cache["weights"][0], float(cache["t_final"][0])
