"""Command line entry point: ``nerfbench <command> [options]``.

Exit status is 0 on success, 1 for bad arguments or invalid inputs and 2
when a run fails part way. Every command writes the fully resolved
configuration next to its output as JSON.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np
from PIL import Image

from .. import pointcloud as pc
from .. import voxelcarve as vc
from ..assets import data_path
from ..geometry import PinholeCamera, sample_capture_poses
from ..scene import build_dataset, load_dataset, load_mesh, save_dataset
from ..tinynerf import EncodingConfig, RenderConfig, TrainConfig, load_model, render_view, save_model, train
from .grid import GridSpec, run_grid
from .measure import REPRESENTATIONS, BenchConfig, build_and_measure, default_render_config, voxel_bounds
from .report import RECORDS_JSON, RESULTS_JSON, emit_report, load_records, load_results, save_records, save_results

log = logging.getLogger("nerfbench")

BUILTIN_MESHES = {"@sphere": "sphere.obj", "@robot": "robot.obj"}


class UsageError(Exception):
    """Bad command line; reported with the usage text."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _size(text: str) -> tuple:
    try:
        w, h = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"image size must be positive, got {text!r}")
    return w, h


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nerfbench", description="Reconstruct one object four ways and compare them.")
    p.add_argument("--workdir", default=".", help="base directory for relative paths")
    p.add_argument("--threads", type=int, default=1, help="worker threads for the grid search")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("dataset", help="render captures of a mesh")
    s.add_argument("--mesh", required=True, help="OBJ path, or @sphere / @robot")
    s.add_argument("--poses", type=int, default=106)
    s.add_argument("--radius", type=float, default=8.0)
    s.add_argument("--size", type=_size, default=(100, 100), metavar="WxH")
    s.add_argument("--fov", type=float, default=17.70, help="vertical field of view, degrees")
    s.add_argument("--full-sphere", action="store_true", help="poses over the whole sphere")
    s.add_argument("--out", required=True)

    s = sub.add_parser("pointcloud", help="back-project depth maps into a PLY cloud")
    s.add_argument("--dataset", required=True)
    s.add_argument("--k", type=int, default=20)
    s.add_argument("--std-ratio", type=float, default=2.0)
    s.add_argument("--out", required=True)

    s = sub.add_parser("voxelize", help="carve a voxel grid from the silhouettes")
    s.add_argument("--dataset", required=True)
    s.add_argument("--resolution", type=int, default=64)
    s.add_argument("--padding", type=float, default=0.05)
    s.add_argument("--dense", action="store_true", help="one byte per voxel")
    s.add_argument("--out", required=True)

    s = sub.add_parser("train", help="fit a tiny-NeRF")
    s.add_argument("--dataset", required=True)
    s.add_argument("--seed", type=int, default=2057)
    s.add_argument("--lr", type=float, default=5e-4)
    s.add_argument("--freqs", type=int, default=9)
    s.add_argument("--iters", type=int, default=5000)
    _add_render_flags(s)
    s.add_argument("--no-identity", action="store_true", help="drop raw xyz from the encoding")
    s.add_argument("--out", required=True)

    s = sub.add_parser("render", help="render a trained model from a dataset pose")
    s.add_argument("--model", required=True)
    s.add_argument("--dataset", required=True, help="supplies the camera and poses")
    s.add_argument("--pose-index", type=int, default=-1)
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("--out", required=True)

    s = sub.add_parser("grid", help="seed x learning rate x L grid search")
    s.add_argument("--dataset", required=True)
    s.add_argument("--spec", help="JSON grid spec; defaults to the shipped one")
    s.add_argument("--iters", type=int, default=5000)
    _add_render_flags(s)
    s.add_argument("--out", required=True)

    s = sub.add_parser("bench", help="build and measure every representation")
    s.add_argument("--dataset", required=True)
    s.add_argument("--mesh", required=True, help="OBJ path, or @sphere / @robot")
    s.add_argument("--which", default=",".join(REPRESENTATIONS))
    s.add_argument("--iters", type=int, default=2000)
    _add_render_flags(s, rays=256)
    s.add_argument("--resolution", type=int, default=256)
    s.add_argument("--k", type=int, default=20)
    s.add_argument("--std-ratio", type=float, default=2.0)
    s.add_argument("--out", required=True)

    s = sub.add_parser("report", help="rebuild the tables from saved results")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    return p


def _add_render_flags(s, rays=None):
    s.add_argument("--rays", type=int, default=rays, help="rays per batch (default: whole image)")
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("--near", type=float)
    s.add_argument("--far", type=float)


def _jsonable(x):
    if isinstance(x, Path):
        return str(x)
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


def write_sidecar(out: Path, config: dict) -> Path:
    """``<dir>/config.json`` for directory outputs, ``<file>.config.json`` otherwise."""
    path = out / "config.json" if out.is_dir() else out.with_name(out.name + ".config.json")
    path.write_text(json.dumps(_jsonable(config), indent=1, sort_keys=True) + "\n")
    return path


def resolve_mesh(name: str, workdir: Path) -> Path:
    if name in BUILTIN_MESHES:
        return data_path(BUILTIN_MESHES[name])
    return workdir / name


def _require_file(path: Path, what: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


def _render_cfg(args, dataset) -> RenderConfig:
    base = default_render_config(dataset)
    return RenderConfig(n_samples=args.samples,
                        near=base.near if args.near is None else args.near,
                        far=base.far if args.far is None else args.far)


def _positive(name, value):
    if value < 1:
        raise ValueError(f"--{name} must be >= 1, got {value}")


def cmd_dataset(args, wd: Path) -> dict:
    mesh_path = _require_file(resolve_mesh(args.mesh, wd), "mesh")
    _positive("poses", args.poses)
    w, h = args.size
    cam = PinholeCamera(fov_y=args.fov, width=w, height=h)
    poses = sample_capture_poses(args.poses, args.radius, hemisphere=not args.full_sphere)
    mesh = load_mesh(mesh_path)
    ds = build_dataset(mesh, cam, poses, mesh_path=str(mesh_path))
    out = save_dataset(ds, wd / args.out)
    return {"mesh": mesh_path, "poses": args.poses, "radius": args.radius, "camera": cam.to_dict(),
            "hemisphere": not args.full_sphere, "out": out}


def cmd_pointcloud(args, wd: Path) -> dict:
    ds = load_dataset(wd / args.dataset)
    cloud = pc.merge([pc.backproject(f) for f in ds.frames])
    kept = pc.filter_outliers(cloud, args.k, args.std_ratio)
    out = wd / args.out
    n = pc.save_ply(kept, out)
    log.info("%d points, %d after filtering, %d bytes", len(cloud), len(kept), n)
    return {"dataset": wd / args.dataset, "k": args.k, "std_ratio": args.std_ratio,
            "points": len(cloud), "kept": len(kept), "bytes": n, "out": out}


def _dataset_bounds(ds, padding):
    if ds.mesh_path and Path(ds.mesh_path).exists():
        return voxel_bounds(load_mesh(ds.mesh_path), padding)
    # no mesh on hand: bound the back-projected surface instead
    pts = pc.merge([pc.backproject(f) for f in ds.frames]).points
    if len(pts) == 0:
        raise ValueError("dataset has no foreground pixels to bound")
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    mid, half = (lo + hi) / 2, (hi - lo) / 2 * (1 + padding)
    return mid - half, mid + half


def cmd_voxelize(args, wd: Path) -> dict:
    _positive("resolution", args.resolution)
    ds = load_dataset(wd / args.dataset)
    bounds = _dataset_bounds(ds, args.padding)
    grid = vc.carve_all(vc.init_grid(bounds, args.resolution), ds)
    out = wd / args.out
    n = vc.save_grid(grid, out, dense=args.dense)
    log.info("%d of %d voxels occupied", grid.occupied_count(), grid.occupancy.size)
    return {"dataset": wd / args.dataset, "resolution": args.resolution, "padding": args.padding,
            "bounds": [list(map(float, b)) for b in bounds], "dense": args.dense,
            "occupied": grid.occupied_count(), "bytes": n, "out": out}


def cmd_train(args, wd: Path) -> dict:
    if args.freqs < 0:
        raise ValueError(f"--freqs must be >= 0, got {args.freqs}")
    ds = load_dataset(wd / args.dataset)
    rcfg = _render_cfg(args, ds)
    tcfg = TrainConfig(seed=args.seed, learning_rate=args.lr, n_iters=args.iters,
                       rays_per_batch=args.rays, eval_every=max(1, min(100, args.iters)),
                       encoding=EncodingConfig(args.freqs, not args.no_identity))
    model, history = train(ds, tcfg, rcfg)
    out = wd / args.out
    n = save_model(model, out)
    return {"dataset": wd / args.dataset, "train": asdict(tcfg), "render": asdict(rcfg),
            "parameters": model.param_count(), "bytes": n, "out": out,
            "history": [h._asdict() for h in history]}


def cmd_render(args, wd: Path) -> dict:
    model = load_model(_require_file(wd / args.model, "model"))
    ds = load_dataset(wd / args.dataset)
    n = len(ds.frames)
    if not -n <= args.pose_index < n:
        raise ValueError(f"--pose-index {args.pose_index} out of range for {n} poses")
    frame = ds.frames[args.pose_index]
    rcfg = RenderConfig.around(float(np.linalg.norm(frame.pose.p)), n_samples=args.samples,
                               stratified=False)
    img = render_view(model, frame.cam, frame.pose, rcfg, background=ds.background)
    out = wd / args.out
    Image.fromarray(np.round(np.clip(img, 0, 1) * 255).astype(np.uint8), "RGB").save(out)
    return {"model": wd / args.model, "dataset": wd / args.dataset, "pose_index": args.pose_index,
            "render": asdict(rcfg), "out": out}


def cmd_grid(args, wd: Path) -> dict:
    spec = GridSpec.load(_require_file(wd / args.spec, "grid spec")) if args.spec else GridSpec.default()
    ds = load_dataset(wd / args.dataset)
    rcfg = _render_cfg(args, ds)
    results = run_grid(ds, spec, rcfg, n_iters=args.iters, rays_per_batch=args.rays, threads=args.threads)
    out = wd / args.out
    out.mkdir(parents=True, exist_ok=True)
    save_results(results, out / RESULTS_JSON)
    emit_report(results, [], out)
    return {"dataset": wd / args.dataset, "spec": spec.to_dict(), "iters": args.iters,
            "rays": args.rays, "render": asdict(rcfg), "threads": args.threads, "out": out}


def cmd_bench(args, wd: Path) -> dict:
    which = [w.strip() for w in args.which.split(",") if w.strip()]
    bad = sorted(set(which) - set(REPRESENTATIONS))
    if bad or not which:
        raise ValueError(f"--which accepts {','.join(REPRESENTATIONS)}; got {args.which!r}")
    mesh_path = _require_file(resolve_mesh(args.mesh, wd), "mesh")
    ds = load_dataset(wd / args.dataset)
    cfg = BenchConfig(k=args.k, std_ratio=args.std_ratio, voxel_resolution=args.resolution,
                      train=TrainConfig(n_iters=args.iters, rays_per_batch=args.rays,
                                        eval_every=max(1, args.iters)),
                      render=_render_cfg(args, ds))
    out = wd / args.out
    records = build_and_measure(ds, load_mesh(mesh_path), mesh_path, out, which, cfg)
    save_records(records, out / RECORDS_JSON)
    emit_report([], records, out)
    failed = [r.name for r in records if r.error]
    if failed:
        raise RuntimeError(f"failed to build: {', '.join(failed)}")
    return {"dataset": wd / args.dataset, "mesh": mesh_path, "which": which,
            "config": cfg.to_dict(), "out": out}


def cmd_report(args, wd: Path) -> dict:
    inp = wd / args.inp
    if not inp.is_dir():
        raise FileNotFoundError(f"input directory not found: {inp}")
    res_path, rec_path = inp / RESULTS_JSON, inp / RECORDS_JSON
    results = load_results(res_path) if res_path.exists() else []
    records = load_records(rec_path) if rec_path.exists() else []
    out = wd / args.out
    emit_report(results, records, out)
    return {"in": inp, "grid_results": len(results), "records": len(records), "out": out}


COMMANDS = {
    "dataset": cmd_dataset, "pointcloud": cmd_pointcloud, "voxelize": cmd_voxelize,
    "train": cmd_train, "render": cmd_render, "grid": cmd_grid, "bench": cmd_bench,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:       # --help
        return 0 if exc.code in (0, None) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    wd = Path(args.workdir)
    started = time.perf_counter()
    try:
        if args.threads < 1:
            raise ValueError(f"--threads must be >= 1, got {args.threads}")
        config = COMMANDS[args.command](args, wd)
        config = {"command": args.command, "workdir": wd, "threads": args.threads,
                  "elapsed_s": round(time.perf_counter() - started, 3), **config}
        write_sidecar(Path(config["out"]), config)
    except (ValueError, FileNotFoundError) as exc:
        print(f"nerfbench {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is a failed run, not a bad request
        log.debug("run failed", exc_info=True)
        print(f"nerfbench {args.command}: failed: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
