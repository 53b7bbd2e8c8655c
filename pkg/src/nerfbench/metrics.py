"""Image quality metrics for unit-range images."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2
LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class QualityReport:
    mse: float
    psnr_db: float
    ssim: float

    def to_dict(self) -> dict:
        return {"mse": self.mse, "psnr_db": self.psnr_db, "ssim": self.ssim}


def mse(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def psnr(mse_value: float) -> float:
    """PSNR in dB for peak value 1; ``inf`` when the error is zero."""
    if mse_value < 0:
        raise ValueError(f"mse must be non-negative, got {mse_value}")
    if mse_value == 0:
        return math.inf
    return -10.0 * math.log10(mse_value)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    g /= g.sum()
    return np.outer(g, g)


def _filter_valid(img: np.ndarray, win: np.ndarray) -> np.ndarray:
    patches = sliding_window_view(img, win.shape)
    return np.einsum("ijkl,kl->ij", patches, win)


def ssim_gray(a: np.ndarray, b: np.ndarray) -> float:
    win = gaussian_window()
    if a.shape[0] < win.shape[0] or a.shape[1] < win.shape[1]:
        raise ValueError(f"image {a.shape} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    mu_a = _filter_valid(a, win)
    mu_b = _filter_valid(b, win)
    var_a = _filter_valid(a * a, win) - mu_a ** 2
    var_b = _filter_valid(b * b, win) - mu_b ** 2
    cov = _filter_valid(a * b, win) - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.mean(num / den))


def ssim(a, b, per_channel: bool = False) -> float:
    """Mean SSIM over valid 11x11 Gaussian windows.

    Color images are compared on luma unless ``per_channel`` is set, in which
    case the per-channel scores are averaged.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        return ssim_gray(a, b)
    if per_channel:
        return float(np.mean([ssim_gray(a[..., c], b[..., c]) for c in range(a.shape[-1])]))
    return ssim_gray(a @ LUMA, b @ LUMA)


def evaluate(pred, target) -> QualityReport:
    m = mse(pred, target)
    return QualityReport(m, psnr(m), ssim(pred, target))
