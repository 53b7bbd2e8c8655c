"""Procedural test objects and the files shipped in ``nerfbench/data``.

``sphere.obj`` is a subdivided icosahedron on the unit sphere. ``robot.obj``
is a vertex-colored, multi-part toy robot standing in for the object of
interest; each part is its own ``o`` group.

Regenerate with ``python -m nerfbench.assets``.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .scene.mesh import TriangleMesh

# seed order follows the reference grid table, so seed-major enumeration
# reproduces its row order
DEFAULT_GRID = {"seeds": [2057, 7461, 5680], "lrs": [5e-3, 5e-4, 5e-5], "freqs": [6, 9, 10, 12]}


def data_path(name: str) -> Path:
    return Path(str(resources.files("nerfbench") / "data" / name))


def icosphere(subdivisions: int = 4) -> TriangleMesh:
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return TriangleMesh(np.array(verts), np.array(faces))


def _grid_faces(rows: int, cols: int, offset: int, wrap: bool) -> list:
    faces = []
    ncol = cols if wrap else cols - 1
    for i in range(rows - 1):
        for j in range(ncol):
            a = offset + i * cols + j
            b = offset + i * cols + (j + 1) % cols
            c, d = a + cols, b + cols
            faces += [(a, c, b), (b, c, d)]
    return faces


def uv_sphere(center, radius, n_lat=24, n_lon=32) -> tuple:
    # interior latitude rings plus one vertex per pole
    lat = np.linspace(0.0, np.pi, n_lat + 2)[1:-1]
    lon = np.linspace(0.0, 2 * np.pi, n_lon, endpoint=False)
    la, lo = np.meshgrid(lat, lon, indexing="ij")
    v = np.stack([np.sin(la) * np.cos(lo), np.sin(la) * np.sin(lo), np.cos(la)], axis=-1).reshape(-1, 3)
    faces = _grid_faces(n_lat, n_lon, 0, True)
    top, bottom = len(v), len(v) + 1
    last = (n_lat - 1) * n_lon
    for j in range(n_lon):
        k = (j + 1) % n_lon
        faces.append((top, j, k))
        faces.append((bottom, last + k, last + j))
    v = np.vstack([v, [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    return np.asarray(center) + radius * v, faces


def cylinder(a, b, radius, n_len=16, n_around=32) -> tuple:
    """Closed tube from point ``a`` to point ``b`` (caps are fans)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    axis = b - a
    axis_n = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0, 0]) if abs(axis_n[0]) < 0.9 else np.array([0, 1.0, 0])
    u = np.cross(axis_n, helper)
    u /= np.linalg.norm(u)
    w = np.cross(axis_n, u)
    ang = np.linspace(0, 2 * np.pi, n_around, endpoint=False)
    ring = radius * (np.cos(ang)[:, None] * u + np.sin(ang)[:, None] * w)
    s = np.linspace(0.0, 1.0, n_len)
    verts = (a + s[:, None, None] * axis + ring[None]).reshape(-1, 3)
    faces = _grid_faces(n_len, n_around, 0, True)
    n = len(verts)
    verts = np.vstack([verts, a, b])
    for j in range(n_around):
        k = (j + 1) % n_around
        faces.append((n, k, j))
        faces.append((n + 1, (n_len - 1) * n_around + j, (n_len - 1) * n_around + k))
    return verts, faces


def box(lo, hi, n=12) -> tuple:
    """Axis-aligned box with every face split into an n x n grid."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    verts, faces = [], []
    s = np.linspace(0.0, 1.0, n + 1)
    for axis in range(3):
        for side in (0, 1):
            a1, a2 = [k for k in range(3) if k != axis]
            g1, g2 = np.meshgrid(s, s, indexing="ij")
            p = np.zeros(g1.shape + (3,))
            p[..., axis] = side
            p[..., a1] = g1
            p[..., a2] = g2
            off = sum(len(v) for v in verts)
            f = _grid_faces(n + 1, n + 1, off, False)
            if (axis == 1) ^ (side == 1):
                f = [(x, z, y) for x, y, z in f]
            verts.append(lo + p.reshape(-1, 3) * (hi - lo))
            faces += f
    return np.vstack(verts), faces


def robot_parts() -> list:
    """(name, vertices, faces, rgb) for each rigid part of the toy robot."""
    steel, blue, white = (0.55, 0.58, 0.62), (0.15, 0.35, 0.80), (0.92, 0.92, 0.90)
    red, yellow, dark = (0.85, 0.12, 0.10), (0.95, 0.75, 0.10), (0.20, 0.20, 0.22)
    parts = [
        ("torso", *box((-0.60, -0.42, 0.00), (0.60, 0.42, 1.00), n=24), blue),
        ("chest_plate", *box((-0.35, -0.47, 0.45), (0.35, -0.42, 0.85), n=10), steel),
        ("head", *uv_sphere((0.0, 0.0, 1.45), 0.45, 44, 72), white),
        ("eye_l", *uv_sphere((-0.16, -0.40, 1.52), 0.09, 16, 24), red),
        ("eye_r", *uv_sphere((0.16, -0.40, 1.52), 0.09, 16, 24), red),
        ("antenna", *cylinder((0.0, 0.0, 1.85), (0.0, 0.0, 2.10), 0.035, 10, 16), steel),
        ("antenna_tip", *uv_sphere((0.0, 0.0, 2.14), 0.08, 16, 24), red),
    ]
    for side, sx in (("l", -1.0), ("r", 1.0)):
        shoulder = (sx * 0.75, 0.0, 0.88)
        elbow = (sx * 1.00, -0.15, 0.50)
        hand = (sx * 1.02, -0.40, 0.22)
        parts += [
            (f"shoulder_{side}", *uv_sphere(shoulder, 0.18, 24, 36), steel),
            (f"upper_arm_{side}", *cylinder(shoulder, elbow, 0.13, 24, 36), yellow),
            (f"elbow_{side}", *uv_sphere(elbow, 0.15, 24, 36), steel),
            (f"forearm_{side}", *cylinder(elbow, hand, 0.12, 24, 36), yellow),
            (f"hand_{side}", *uv_sphere(hand, 0.15, 24, 36), white),
            (f"leg_{side}", *cylinder((sx * 0.30, 0.0, 0.0), (sx * 0.30, 0.0, -0.70), 0.17, 30, 40), dark),
            (f"foot_{side}", *box((sx * 0.30 - 0.22, -0.42, -0.85), (sx * 0.30 + 0.22, 0.18, -0.70), n=12), dark),
        ]
    return parts


def write_robot_obj(path, precision: int = 6) -> None:
    lines = ["# toy robot, vertex colors after xyz"]
    base = 1
    for name, verts, faces, rgb in robot_parts():
        lines.append(f"o {name}")
        col = " ".join(f"{c:.3f}" for c in rgb)
        lines += [f"v {x:.{precision}f} {y:.{precision}f} {z:.{precision}f} {col}" for x, y, z in verts]
        lines += [f"f {a + base} {b + base} {c + base}" for a, b, c in faces]
        base += len(verts)
    Path(path).write_text("\n".join(lines) + "\n")


def write_assets(directory) -> None:
    from .scene.mesh import save_obj

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_obj(icosphere(4), d / "sphere.obj", precision=9)
    write_robot_obj(d / "robot.obj")
    (d / "grid_spec.json").write_text(json.dumps(DEFAULT_GRID) + "\n")


if __name__ == "__main__":
    write_assets(Path(__file__).parent / "data")
