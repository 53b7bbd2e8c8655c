"""
Fitting a tiny NeRF
===================

The implicit representation is a small MLP from encoded 3D position to color
and density, rendered by compositing samples along each camera ray. This demo
trains one briefly, compares it with the simplest possible predictor, and
saves a side-by-side render of the held-out view.

The default 300 iterations finish in about a minute, but the model is still
on its early plateau there: it has learned the average color and little else,
so it only just beats the baseline. Detail appears after roughly 700
iterations. Pass a larger count on the command line to see it, e.g.
``python demos/03_tiny_nerf.py 2000``.
"""
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from nerfbench.assets import data_path
from nerfbench.geometry import PinholeCamera, sample_capture_poses
from nerfbench.metrics import evaluate, mse, psnr
from nerfbench.scene import build_dataset, load_mesh
from nerfbench.tinynerf import (EncodingConfig, RenderConfig, TrainConfig, positional_encode,
                                render_view, save_model, train)

OUT = Path("demo_output")
OUT.mkdir(exist_ok=True)
ITERS = int(sys.argv[1]) if len(sys.argv) > 1 else 300

# %%
# Positional encoding lifts a point into sines and cosines of doubling
# frequency. With 9 frequencies a 3-vector becomes 57 numbers.
enc = EncodingConfig(9)
print("encoded width:", positional_encode(np.zeros(3), enc).shape[0])

dataset = build_dataset(load_mesh(data_path("sphere.obj")), PinholeCamera(width=64, height=64),
                        sample_capture_poses(21, 8.0))
held = dataset.frames[-1]

# %%
# A constant image of the average training color is the floor any model
# should clear.
mean_color = np.mean([f.rgb.reshape(-1, 3).mean(axis=0) for f in dataset.frames[:-1]], axis=0)
baseline = psnr(mse(np.broadcast_to(mean_color, held.rgb.shape), held.rgb))
print(f"constant-color baseline on the held-out view: {baseline:.2f} dB")

render_cfg = RenderConfig.around(8.0, n_samples=32)
cfg = TrainConfig(seed=2057, learning_rate=5e-4, n_iters=ITERS, rays_per_batch=256,
                  eval_every=max(1, ITERS // 5), encoding=enc)
model, history = train(dataset, cfg, render_cfg)
for h in history:
    print(f"iter {h.iteration:5d}  batch loss {h.train_loss:.4f}  held-out {h.psnr_db:.2f} dB")

# %%
# Render the held-out pose without jitter and score it.
pred = render_view(model, held.cam, held.pose, RenderConfig.around(8.0, n_samples=64, stratified=False))
q = evaluate(pred, held.rgb)
print(f"final: {q.psnr_db:.2f} dB ({q.psnr_db - baseline:+.2f} over baseline), SSIM {q.ssim:.3f}")

pair = np.concatenate([held.rgb, np.clip(pred, 0, 1)], axis=1)
Image.fromarray(np.round(pair * 255).astype(np.uint8)).save(OUT / "nerf_vs_truth.png")
n = save_model(model, OUT / "sphere.tnrf")
print(f"{model.param_count()} parameters, checkpoint {n} bytes")
