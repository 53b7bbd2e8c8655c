"""Point-cloud representation: back-projection, merging, outlier removal, PLY I/O."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .geometry import generate_rays
from .scene.capture import CaptureFrame


class PlyFormatError(ValueError):
    pass


@dataclass
class PointCloud:
    points: np.ndarray
    colors: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        self.colors = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3)
        if len(self.points) != len(self.colors):
            raise ValueError("points and colors must have equal length")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point coordinates must be finite")

    def __len__(self):
        return len(self.points)

    @classmethod
    def empty(cls) -> "PointCloud":
        return cls(np.zeros((0, 3)), np.zeros((0, 3)))


def backproject(frame: CaptureFrame) -> PointCloud:
    origins, dirs = generate_rays(frame.cam, frame.pose)
    m = frame.mask
    pts = origins[m] + frame.depth[m][:, None] * dirs[m]
    return PointCloud(pts, frame.rgb[m])


def merge(clouds) -> PointCloud:
    clouds = list(clouds)
    if not clouds:
        return PointCloud.empty()
    return PointCloud(np.concatenate([c.points for c in clouds]),
                      np.concatenate([c.colors for c in clouds]))


def mean_knn_distance(points: np.ndarray, k: int) -> np.ndarray:
    """Mean distance from each point to its ``k`` nearest other points."""
    tree = cKDTree(points)
    dist, _ = tree.query(points, k=k + 1)
    # column 0 is the query point itself (or an exact duplicate at distance 0)
    return dist[:, 1:].mean(axis=1)


def filter_outliers(cloud: PointCloud, k: int = 20, std_ratio: float = 2.0) -> PointCloud:
    """Statistical outlier removal.

    A point is kept when its mean k-NN distance is at most the population mean
    of that statistic plus ``std_ratio`` population standard deviations.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if std_ratio <= 0:
        raise ValueError(f"std_ratio must be positive, got {std_ratio}")
    if len(cloud) < k + 1:
        warnings.warn(f"cloud has {len(cloud)} points, fewer than k+1={k + 1}; not filtered",
                      stacklevel=2)
        return cloud
    stat = mean_knn_distance(cloud.points, k)
    keep = stat <= stat.mean() + std_ratio * stat.std()
    return PointCloud(cloud.points[keep], cloud.colors[keep])


PLY_VERTEX = np.dtype([("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
                       ("red", "u1"), ("green", "u1"), ("blue", "u1")])
_PLY_PROPS = [("float", "x"), ("float", "y"), ("float", "z"),
              ("uchar", "red"), ("uchar", "green"), ("uchar", "blue")]


def ply_header(n: int) -> bytes:
    lines = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    lines += [f"property {t} {name}" for t, name in _PLY_PROPS]
    lines.append("end_header")
    return ("\n".join(lines) + "\n").encode("ascii")


def save_ply(cloud: PointCloud, path) -> int:
    rec = np.empty(len(cloud), dtype=PLY_VERTEX)
    pts = cloud.points.astype(np.float32)
    rec["x"], rec["y"], rec["z"] = pts[:, 0], pts[:, 1], pts[:, 2]
    col = np.round(np.clip(cloud.colors, 0.0, 1.0) * 255.0).astype(np.uint8)
    rec["red"], rec["green"], rec["blue"] = col[:, 0], col[:, 1], col[:, 2]
    blob = ply_header(len(cloud)) + rec.tobytes()
    Path(path).write_bytes(blob)
    return len(blob)


def load_ply(path) -> PointCloud:
    blob = Path(path).read_bytes()
    end = blob.find(b"end_header\n")
    if not blob.startswith(b"ply\n"):
        raise PlyFormatError("byte 0: missing 'ply' magic")
    if end < 0:
        raise PlyFormatError(f"byte {len(blob)}: no end_header line")
    body = end + len(b"end_header\n")
    n = None
    props = []
    offset = 0
    for line in blob[:end].split(b"\n"):
        words = line.decode("ascii", errors="replace").split()
        if words[:1] == ["format"] and words[1:2] != ["binary_little_endian"]:
            raise PlyFormatError(f"byte {offset}: unsupported format {' '.join(words[1:])!r}")
        if words[:2] == ["element", "vertex"]:
            n = int(words[2])
        elif words[:1] == ["element"]:
            raise PlyFormatError(f"byte {offset}: unexpected element {words[1]!r}")
        elif words[:1] == ["property"]:
            props.append((words[1], words[2]))
        offset += len(line) + 1
    if n is None:
        raise PlyFormatError(f"byte {body}: header declares no vertex element")
    if props != _PLY_PROPS:
        raise PlyFormatError(f"byte {body}: expected properties {_PLY_PROPS}, got {props}")
    need = body + n * PLY_VERTEX.itemsize
    if len(blob) != need:
        raise PlyFormatError(f"byte {len(blob)}: expected {need} bytes for {n} vertices")
    rec = np.frombuffer(blob, dtype=PLY_VERTEX, count=n, offset=body)
    pts = np.stack([rec["x"], rec["y"], rec["z"]], axis=1).astype(np.float64)
    col = np.stack([rec["red"], rec["green"], rec["blue"]], axis=1) / 255.0
    return PointCloud(pts, col)

