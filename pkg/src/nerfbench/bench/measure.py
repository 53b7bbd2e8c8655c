"""Build each representation from the shared captures and record time and size."""
from __future__ import annotations

import logging
import os
import shutil
import time
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import pointcloud as pc
from .. import voxelcarve as vc
from ..metrics import QualityReport, evaluate
from ..scene.mesh import TriangleMesh
from ..tinynerf import EncodingConfig, RenderConfig, TrainConfig, render_view, save_model, train
from ..tinynerf.train import split_holdout

log = logging.getLogger(__name__)

REPRESENTATIONS = ("mesh", "pointcloud", "voxel", "implicit")


@dataclass
class BenchConfig:
    k: int = 20
    std_ratio: float = 2.0
    voxel_resolution: int = 256
    voxel_padding: float = 0.05
    train: TrainConfig = field(default_factory=lambda: TrainConfig(
        seed=2057, learning_rate=5e-4, n_iters=2000, rays_per_batch=256, eval_every=500,
        encoding=EncodingConfig(9)))
    render: RenderConfig | None = None     # None derives the depth band from the capture radius

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


@dataclass
class BenchRecord:
    name: str
    build_time_s: float
    size_mb: float
    files: dict = field(default_factory=dict)     # file name -> bytes on disk
    steps: dict = field(default_factory=dict)     # step name -> seconds
    quality: QualityReport | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["quality"] = self.quality.to_dict() if self.quality else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BenchRecord":
        d = dict(d)
        if d.get("quality"):
            d["quality"] = QualityReport(**d["quality"])
        return cls(**d)


class _Stopwatch:
    def __init__(self):
        self.steps = {}

    def run(self, name, fn, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        self.steps[name] = time.perf_counter() - t0
        return out


def _file_bytes(path: Path, reported: int | None = None) -> int:
    n = os.path.getsize(path)
    if reported is not None and n != reported:
        raise RuntimeError(f"{path}: wrote {reported} bytes but the file holds {n}")
    return n


def default_render_config(dataset) -> RenderConfig:
    dist = float(np.linalg.norm(dataset.frames[0].pose.p))
    return RenderConfig.around(dist)


def voxel_bounds(mesh: TriangleMesh, padding: float):
    lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0 * (1.0 + padding)
    return mid - half, mid + half


def build_mesh(mesh_path, out: Path) -> BenchRecord:
    sw = _Stopwatch()
    dst = out / "mesh.obj"
    sw.run("copy", shutil.copyfile, mesh_path, dst)
    n = _file_bytes(dst)
    return BenchRecord("mesh", sw.steps["copy"], n / 1e6, {dst.name: n}, sw.steps)


def build_pointcloud(dataset, out: Path, cfg: BenchConfig) -> BenchRecord:
    sw = _Stopwatch()
    parts = sw.run("backproject", lambda: [pc.backproject(f) for f in dataset.frames])
    merged = sw.run("merge", pc.merge, parts)
    cloud = sw.run("filter", pc.filter_outliers, merged, cfg.k, cfg.std_ratio)
    build = sum(sw.steps.values())
    dst = out / "pointcloud.ply"
    n = _file_bytes(dst, sw.run("save", pc.save_ply, cloud, dst))
    log.info("point cloud: %d merged, %d kept", len(merged), len(cloud))
    return BenchRecord("pointcloud", build, n / 1e6, {dst.name: n}, sw.steps)


def build_voxels(dataset, mesh: TriangleMesh, out: Path, cfg: BenchConfig) -> BenchRecord:
    sw = _Stopwatch()
    grid = sw.run("init", vc.init_grid, voxel_bounds(mesh, cfg.voxel_padding), cfg.voxel_resolution)
    grid = sw.run("carve", vc.carve_all, grid, dataset)
    build = sum(sw.steps.values())
    bits, dense = out / "voxels.bin", out / "voxels_dense.bin"
    nb = _file_bytes(bits, sw.run("save", vc.save_grid, grid, bits))
    nd = _file_bytes(dense, vc.save_grid(grid, dense, dense=True))
    log.info("voxels: %d of %d occupied", grid.occupied_count(), grid.occupancy.size)
    return BenchRecord("voxel", build, nb / 1e6, {bits.name: nb, dense.name: nd}, sw.steps)


def build_implicit(dataset, out: Path, cfg: BenchConfig) -> BenchRecord:
    sw = _Stopwatch()
    render_cfg = cfg.render or default_render_config(dataset)
    model, history = sw.run("train", train, dataset, cfg.train, render_cfg)
    build = sw.steps["train"]
    dst = out / "implicit.tnrf"
    n = _file_bytes(dst, sw.run("save", save_model, model, dst))
    _, hold = split_holdout(len(dataset.frames), cfg.train.holdout)
    frame = dataset.frames[hold if hold is not None else 0]
    pred = render_view(model, frame.cam, frame.pose, RenderConfig(
        render_cfg.n_samples, render_cfg.near, render_cfg.far, False, render_cfg.white_background),
        background=dataset.background)
    return BenchRecord("implicit", build, n / 1e6, {dst.name: n}, sw.steps, evaluate(pred, frame.rgb))


def build_and_measure(dataset, mesh: TriangleMesh, mesh_path, out, which=REPRESENTATIONS,
                      cfg: BenchConfig | None = None) -> list:
    """Build the requested representations into ``out`` and measure each one.

    Times cover the build only (captures are shared inputs); serialization is
    listed separately under ``steps``. A failing builder is recorded with its
    error and the others still run.
    """
    cfg = cfg or BenchConfig()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    builders = {
        "mesh": lambda: build_mesh(mesh_path, out),
        "pointcloud": lambda: build_pointcloud(dataset, out, cfg),
        "voxel": lambda: build_voxels(dataset, mesh, out, cfg),
        "implicit": lambda: build_implicit(dataset, out, cfg),
    }
    records = []
    for name in which:
        if name not in builders:
            raise ValueError(f"unknown representation {name!r}; choose from {REPRESENTATIONS}")
        log.info("building %s", name)
        try:
            records.append(builders[name]())
        except Exception as exc:  # one failing builder must not sink the others
            log.error("%s failed: %s", name, exc)
            records.append(BenchRecord(name, float("nan"), float("nan"),
                                       error="".join(traceback.format_exception_only(type(exc), exc)).strip()))
    return records
