"""Triangle meshes and Wavefront OBJ input."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEGENERATE_AREA = 1e-12
# checkerboard cell edge for meshes without vertex colors (normalized units)
CHECKER_CELL = 0.5
CHECKER_COLORS = np.array([[0.85, 0.30, 0.20], [0.20, 0.45, 0.85]])


class MeshFormatError(ValueError):
    pass


@dataclass
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    colors: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.colors is not None:
            self.colors = np.ascontiguousarray(self.colors, dtype=np.float64).reshape(-1, 3)
            if len(self.colors) != len(self.vertices):
                raise ValueError("need one color per vertex")
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("mesh has non-finite vertex coordinates")
        if len(self.triangles) and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")

    def triangle_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def face_normals(self) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        n = np.cross(b - a, c - a)
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def triangle_colors(self) -> np.ndarray:
        """Per-triangle colors: vertex-color mean, else a 3D checkerboard on centroids."""
        if self.colors is not None:
            return self.colors[self.triangles].mean(axis=1)
        cent = self.vertices[self.triangles].mean(axis=1)
        cell = np.floor(cent / CHECKER_CELL).astype(np.int64).sum(axis=1)
        return CHECKER_COLORS[cell % 2]

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.vertices, axis=1).max())


def parse_obj(text: str) -> TriangleMesh:
    verts, cols, tris = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "v":
                vals = [float(x) for x in parts[1:]]
                if len(vals) not in (3, 4, 6, 7):
                    raise ValueError(f"expected 3 or 6 values, got {len(vals)}")
                verts.append(vals[:3])
                if len(vals) >= 6:
                    cols.append(vals[3:6] if len(vals) == 6 else vals[4:7])
            elif tag == "f":
                idx = []
                for tok in parts[1:]:
                    k = int(tok.split("/")[0])
                    if k == 0:
                        raise ValueError("OBJ indices are 1-based")
                    idx.append(k - 1 if k > 0 else len(verts) + k)
                if len(idx) < 3:
                    raise ValueError("face needs at least 3 vertices")
                for m in range(1, len(idx) - 1):
                    tris.append((idx[0], idx[m], idx[m + 1]))
        except ValueError as exc:
            raise MeshFormatError(f"line {lineno}: {exc}") from None
    if not tris:
        raise MeshFormatError("mesh contains no triangles")
    if cols and len(cols) != len(verts):
        raise MeshFormatError("vertex colors given for only some vertices")
    v = np.array(verts, dtype=np.float64)
    t = np.array(tris, dtype=np.int64)
    if t.min() < 0 or t.max() >= len(v):
        raise MeshFormatError("face references a vertex that does not exist")
    return TriangleMesh(v, t, np.array(cols) if cols else None)


def normalize_mesh(mesh: TriangleMesh) -> TriangleMesh:
    """Center on the bounding-box midpoint and scale into the unit sphere."""
    lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
    v = mesh.vertices - (lo + hi) / 2.0
    scale = np.linalg.norm(v, axis=1).max()
    if scale > 0:
        v = v / scale
    return TriangleMesh(v, mesh.triangles, mesh.colors)


def drop_degenerate(mesh: TriangleMesh) -> TriangleMesh:
    keep = mesh.triangle_areas() > DEGENERATE_AREA
    dropped = int((~keep).sum())
    if dropped:
        warnings.warn(f"dropped {dropped} degenerate triangles", stacklevel=3)
    if not keep.any():
        raise MeshFormatError("mesh has no non-degenerate triangles")
    return TriangleMesh(mesh.vertices, mesh.triangles[keep], mesh.colors)


def load_mesh(path) -> TriangleMesh:
    text = Path(path).read_text()
    return drop_degenerate(normalize_mesh(parse_obj(text)))


def save_obj(mesh: TriangleMesh, path, precision: int = 6) -> None:
    lines = []
    if mesh.colors is not None:
        for (x, y, z), (r, g, b) in zip(mesh.vertices, mesh.colors):
            lines.append(f"v {x:.{precision}f} {y:.{precision}f} {z:.{precision}f} {r:.3f} {g:.3f} {b:.3f}")
    else:
        for x, y, z in mesh.vertices:
            lines.append(f"v {x:.{precision}f} {y:.{precision}f} {z:.{precision}f}")
    for a, b, c in mesh.triangles + 1:
        lines.append(f"f {a} {b} {c}")
    Path(path).write_text("\n".join(lines) + "\n")
