"""
Capturing an object from many viewpoints
========================================

Every representation in the benchmark starts from the same input: a set of
RGB images, depth maps and silhouettes of one mesh, taken by cameras spread
over a sphere around it. This script renders the robot mesh from a handful of
poses and tiles the results into one contact sheet.
"""
from pathlib import Path

import numpy as np
from PIL import Image

from nerfbench.assets import data_path
from nerfbench.geometry import PinholeCamera, sample_capture_poses
from nerfbench.scene import build_dataset, load_mesh

OUT = Path("demo_output")
OUT.mkdir(exist_ok=True)

# %%
# The mesh is normalized into the unit sphere when it is loaded, so a camera
# at radius 8 with a ~17.7 degree field of view frames it with a small border.
mesh = load_mesh(data_path("robot.obj"))
print(f"{len(mesh.vertices)} vertices, {len(mesh.triangles)} triangles, "
      f"bounding radius {mesh.bounding_radius():.3f}")

cam = PinholeCamera(width=96, height=96)
poses = sample_capture_poses(12, radius=8.0)
dataset = build_dataset(mesh, cam, poses)

# %%
# Poses come from a Fibonacci lattice on the upper hemisphere, so the first
# cameras look down from near the pole and later ones approach the equator.
for i, pose in enumerate(dataset.poses):
    height = pose.p[2] / np.linalg.norm(pose.p)
    print(f"pose {i:2d}: elevation {np.degrees(np.arcsin(height)):5.1f} deg")

# %%
# Each frame carries an RGB image, a Euclidean depth map (inf where the ray
# misses) and the boolean mask. Depth is shown normalized over the hits.
def depth_to_gray(depth):
    hit = np.isfinite(depth)
    out = np.zeros(depth.shape)
    if hit.any():
        d = depth[hit]
        out[hit] = 1.0 - (d - d.min()) / max(np.ptp(d), 1e-9)
    return np.repeat(out[..., None], 3, axis=2)


rows = []
for f in dataset.frames[:6]:
    rows.append(np.concatenate([f.rgb, depth_to_gray(f.depth),
                                np.repeat(f.mask[..., None], 3, axis=2).astype(float)], axis=1))
sheet = np.concatenate(rows, axis=0)
Image.fromarray(np.round(sheet * 255).astype(np.uint8)).save(OUT / "captures.png")
print(f"wrote {OUT / 'captures.png'}  (columns: color, depth, mask)")

coverage = np.mean([f.mask.mean() for f in dataset.frames])
print(f"object covers {100 * coverage:.1f}% of each image on average")
