"""Dataset directory layout: dataset.json plus per-frame PNG and PFM files."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from ..geometry import PinholeCamera, Transform
from .capture import CaptureFrame, Dataset


def write_pfm(path, data: np.ndarray) -> None:
    """Single-channel little-endian PFM; rows are stored bottom-up."""
    data = np.asarray(data, dtype="<f4")
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        fh.write(np.ascontiguousarray(data[::-1]).tobytes())


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    lines = blob.split(b"\n", 3)
    if len(lines) < 4 or lines[0].strip() != b"Pf":
        raise ValueError(f"{path}: not a grayscale PFM file")
    w, h = (int(x) for x in lines[1].split())
    scale = float(lines[2])
    dtype = "<f4" if scale < 0 else ">f4"
    arr = np.frombuffer(lines[3], dtype=dtype, count=w * h).reshape(h, w)
    return arr[::-1].astype(np.float32)


def _to_u8(rgb):
    return np.round(np.clip(rgb, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_dataset(dataset: Dataset, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    meta = {
        "camera": dataset.cam.to_dict(),
        "background": list(dataset.background),
        "mesh_path": dataset.mesh_path,
        "poses": [[float(x) for x in f.pose.as_matrix().ravel()] for f in dataset.frames],
    }
    (d / "dataset.json").write_text(json.dumps(meta, indent=1))
    for i, f in enumerate(dataset.frames):
        Image.fromarray(_to_u8(f.rgb), "RGB").save(d / f"frame_{i:04d}.png")
        write_pfm(d / f"frame_{i:04d}.pfm", f.depth)
        Image.fromarray(f.mask.astype(np.uint8) * 255, "L").save(d / f"frame_{i:04d}_mask.png")
    return d


def load_dataset(directory) -> Dataset:
    d = Path(directory)
    meta_path = d / "dataset.json"
    if not meta_path.exists():
        raise FileNotFoundError(f"no dataset.json in {d}")
    meta = json.loads(meta_path.read_text())
    cam = PinholeCamera.from_dict(meta["camera"])
    frames = []
    for i, m in enumerate(meta["poses"]):
        pose = Transform.from_matrix(np.array(m).reshape(4, 4))
        rgb = np.asarray(Image.open(d / f"frame_{i:04d}.png").convert("RGB"), dtype=np.float64) / 255.0
        depth = read_pfm(d / f"frame_{i:04d}.pfm").astype(np.float64)
        mask = np.asarray(Image.open(d / f"frame_{i:04d}_mask.png")) > 127
        frames.append(CaptureFrame(rgb, depth, mask, pose, cam))
    return Dataset(frames, tuple(meta["background"]), meta.get("mesh_path", ""))
