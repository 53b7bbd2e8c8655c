"""
A miniature grid search and its report
======================================

The benchmark sweeps seed, learning rate and the number of encoding
frequencies, then writes CSV and Markdown tables. Here the sweep is shrunk to
a few cells on a tiny dataset so it finishes in about a minute; the command
line tool runs the full-size version (``nerfbench grid``).
"""
from pathlib import Path

from nerfbench.assets import data_path
from nerfbench.bench import GridSpec, average_by, emit_report, run_grid
from nerfbench.geometry import PinholeCamera, sample_capture_poses
from nerfbench.scene import build_dataset, load_mesh
from nerfbench.tinynerf import RenderConfig

OUT = Path("demo_output") / "grid"

dataset = build_dataset(load_mesh(data_path("sphere.obj")), PinholeCamera(width=24, height=24),
                        sample_capture_poses(12, 8.0))

spec = GridSpec(seeds=(2057, 7461), learning_rates=(5e-3, 5e-4), n_freqs=(0, 6, 9))
print(f"{len(spec)} cells")
results = run_grid(dataset, spec, RenderConfig.around(8.0, n_samples=16), n_iters=60, rays_per_batch=128)

# %%
# Averaging over seeds is what turns the raw table into a comparison of
# settings. Diverged cells would be counted in the last column.
for row in average_by(results):
    print(f"lr={row['lr']:<7g} L={row['n_freqs']:<2d} loss={row['loss']:.4f} "
          f"psnr={row['psnr_db']:.2f} dB  diverged={row['diverged']}")

files = emit_report(results, [], OUT)
print("wrote", ", ".join(sorted(files)))
print((OUT / "grid.csv").read_text())
