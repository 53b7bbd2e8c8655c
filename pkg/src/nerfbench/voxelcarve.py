"""Solid voxel representation built by silhouette carving.

Occupancy is stored as a boolean array indexed ``[ix, iy, iz]``; voxel
``(ix, iy, iz)`` has its center at ``origin + (i + 0.5) * voxel_size``.

Grid files are little-endian::

    magic "VOXC" | u32 version=1 | 3 x f64 origin | f64 voxel_size | 3 x u32 dims
    occupancy bits, C order over (ix, iy, iz), packed LSB-first

The dense variant uses magic "VOXD" and one byte (0 or 1) per voxel.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import project_points
from .scene.capture import CaptureFrame

HEADER = struct.Struct("<4sI3ddIII")
VERSION = 1
CHUNK = 1 << 21


class GridFormatError(ValueError):
    pass


@dataclass
class VoxelGrid:
    origin: np.ndarray
    voxel_size: float
    occupancy: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        self.occupancy = np.asarray(self.occupancy, dtype=bool)
        if self.occupancy.ndim != 3 or min(self.occupancy.shape) < 1:
            raise ValueError(f"occupancy must be a non-empty 3D array, got shape {self.occupancy.shape}")
        if not self.voxel_size > 0:
            raise ValueError(f"voxel_size must be positive, got {self.voxel_size}")

    @property
    def dims(self) -> tuple:
        return tuple(int(n) for n in self.occupancy.shape)

    def occupied_count(self) -> int:
        return int(self.occupancy.sum())

    def centers(self, flat_index=None) -> np.ndarray:
        if flat_index is None:
            flat_index = np.arange(self.occupancy.size)
        ijk = np.stack(np.unravel_index(flat_index, self.dims), axis=-1)
        return self.origin + (ijk + 0.5) * self.voxel_size

    def copy(self) -> "VoxelGrid":
        return VoxelGrid(self.origin.copy(), self.voxel_size, self.occupancy.copy())


def init_grid(bounds, resolution: int = 64) -> VoxelGrid:
    """Fully occupied grid covering the box ``bounds = (min_corner, max_corner)``."""
    lo, hi = (np.asarray(b, dtype=np.float64) for b in bounds)
    extent = hi - lo
    if np.any(extent <= 0):
        raise ValueError(f"box must have positive extent on every axis, got {extent}")
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    size = float(extent.max()) / resolution
    dims = [max(1, math.ceil(e / size - 1e-9)) for e in extent]
    return VoxelGrid(lo, size, np.ones(dims, dtype=bool))


def silhouette_keep(frame: CaptureFrame, centers: np.ndarray) -> np.ndarray:
    """True for points that this frame does not prove empty."""
    cam = frame.cam
    row, col, front = project_points(cam, frame.pose, centers)
    inside = front & (row >= 0) & (row < cam.height) & (col >= 0) & (col < cam.width)
    keep = np.ones(len(centers), dtype=bool)
    r = row[inside].astype(np.int64)
    c = col[inside].astype(np.int64)
    keep[inside] = frame.mask[r, c]
    return keep


def carve(grid: VoxelGrid, frame: CaptureFrame) -> VoxelGrid:
    """Clear occupied voxels whose centers project onto background pixels."""
    out = grid.copy()
    flat = out.occupancy.reshape(-1)
    occ = np.flatnonzero(flat)
    for s in range(0, len(occ), CHUNK):
        idx = occ[s:s + CHUNK]
        flat[idx] = silhouette_keep(frame, grid.centers(idx))
    return out


def carve_all(grid: VoxelGrid, frames) -> VoxelGrid:
    frames = list(getattr(frames, "frames", frames))
    if not frames:
        raise ValueError("need at least one frame to carve")
    out = grid
    for f in frames:
        out = carve(out, f)
    return out


def save_grid(grid: VoxelGrid, path, dense: bool = False) -> int:
    magic = b"VOXD" if dense else b"VOXC"
    head = HEADER.pack(magic, VERSION, *grid.origin, grid.voxel_size, *grid.dims)
    flat = grid.occupancy.reshape(-1)
    body = flat.astype(np.uint8).tobytes() if dense else np.packbits(flat, bitorder="little").tobytes()
    Path(path).write_bytes(head + body)
    return HEADER.size + len(body)


def load_grid(path) -> VoxelGrid:
    blob = Path(path).read_bytes()
    if len(blob) < HEADER.size:
        raise GridFormatError(f"file is {len(blob)} bytes, shorter than the {HEADER.size}-byte header")
    magic, version, ox, oy, oz, size, nx, ny, nz = HEADER.unpack_from(blob)
    if magic not in (b"VOXC", b"VOXD"):
        raise GridFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise GridFormatError(f"unsupported version {version}")
    n = nx * ny * nz
    body = blob[HEADER.size:]
    if magic == b"VOXD":
        if len(body) != n:
            raise GridFormatError(f"expected {n} dense bytes, found {len(body)}")
        flat = np.frombuffer(body, dtype=np.uint8) != 0
    else:
        if len(body) != (n + 7) // 8:
            raise GridFormatError(f"expected {(n + 7) // 8} packed bytes, found {len(body)}")
        flat = np.unpackbits(np.frombuffer(body, dtype=np.uint8), count=n, bitorder="little").astype(bool)
    return VoxelGrid((ox, oy, oz), size, flat.reshape(nx, ny, nz))
