"""
Point clouds and voxel grids from the same captures
===================================================

Two explicit representations can be built without any training: lifting
depth pixels into 3D gives a point cloud, and intersecting silhouettes gives a
voxel visual hull. Both are written to disk so their sizes can be compared.
"""
import time
from pathlib import Path

import numpy as np

from nerfbench import pointcloud as pc
from nerfbench import voxelcarve as vc
from nerfbench.assets import data_path
from nerfbench.bench.measure import voxel_bounds
from nerfbench.geometry import PinholeCamera, sample_capture_poses
from nerfbench.scene import build_dataset, load_mesh

OUT = Path("demo_output")
OUT.mkdir(exist_ok=True)

mesh = load_mesh(data_path("sphere.obj"))
dataset = build_dataset(mesh, PinholeCamera(width=64, height=64), sample_capture_poses(40, 8.0))

# %%
# Back-projection: every masked pixel becomes origin + depth * direction.
# On the unit sphere the radius of each point is a direct accuracy check.
t0 = time.perf_counter()
cloud = pc.merge([pc.backproject(f) for f in dataset.frames])
radius = np.linalg.norm(cloud.points, axis=1)
print(f"{len(cloud)} points, radius in [{radius.min():.4f}, {radius.max():.4f}]")

# A few stray points make the statistical filter visible.
rng = np.random.default_rng(0)
noise = rng.uniform(-3, 3, (25, 3))
noisy = pc.PointCloud(np.vstack([cloud.points, noise]), np.vstack([cloud.colors, np.zeros((25, 3))]))
kept = pc.filter_outliers(noisy, k=20, std_ratio=2.0)
print(f"outlier filter: {len(noisy)} -> {len(kept)} points "
      f"({len(noisy) - len(kept)} removed, 25 planted)")
n_ply = pc.save_ply(kept, OUT / "sphere.ply")
print(f"point cloud built in {time.perf_counter() - t0:.2f} s, {n_ply} bytes on disk")

# %%
# Voxel carving: start from a full grid around the mesh and clear every voxel
# whose center projects onto background in some view.
t0 = time.perf_counter()
grid = vc.carve_all(vc.init_grid(voxel_bounds(mesh, 0.05), 64), dataset)
frac = grid.occupied_count() / grid.occupancy.size
print(f"carved {grid.occupied_count()} of {grid.occupancy.size} voxels ({frac:.3f} of the box)")
n_bits = vc.save_grid(grid, OUT / "sphere.vox")
n_dense = vc.save_grid(grid, OUT / "sphere_dense.vox", dense=True)
print(f"voxels built in {time.perf_counter() - t0:.2f} s; "
      f"bit-packed {n_bits} bytes, dense {n_dense} bytes")

# With more views the hull tightens towards the sphere itself.
for n in (3, 10, 40):
    g = vc.carve_all(vc.init_grid(voxel_bounds(mesh, 0.05), 48), dataset.frames[:n])
    print(f"{n:3d} views -> {g.occupied_count() * g.voxel_size ** 3:.3f} units^3 "
          f"(sphere: {4 / 3 * np.pi:.3f})")
