from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EncodingConfig:
    """Sin/cos lifting of 3D points at frequencies 1, 2, ..., 2**(n_freqs-1)."""

    n_freqs: int = 9
    include_identity: bool = True

    def __post_init__(self):
        if self.n_freqs < 0:
            raise ValueError(f"n_freqs must be >= 0, got {self.n_freqs}")

    @property
    def dim(self) -> int:
        return 6 * self.n_freqs + (3 if self.include_identity else 0)


def positional_encode(points, cfg: EncodingConfig, dtype=None) -> np.ndarray:
    """Encode points of shape (..., 3) into (..., cfg.dim).

    Layout is ``[p, sin(p), cos(p), sin(2p), cos(2p), ...]`` with each block
    holding the three coordinates.
    """
    p = np.asarray(points)
    dtype = dtype or (p.dtype if p.dtype.kind == "f" else np.float64)
    p = p.astype(dtype, copy=False)
    blocks = [p] if cfg.include_identity else []
    for k in range(cfg.n_freqs):
        q = p * np.asarray(2.0 ** k, dtype=dtype)
        blocks.append(np.sin(q))
        blocks.append(np.cos(q))
    if not blocks:
        return np.zeros(p.shape[:-1] + (0,), dtype=dtype)
    return np.concatenate(blocks, axis=-1)
