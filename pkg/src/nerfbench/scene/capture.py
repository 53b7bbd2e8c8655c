"""Synthetic captures: RGB, depth and silhouette renders of a mesh."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import PinholeCamera, PoseSet, Ray, Transform, generate_rays
from .bvh import BVH, build_bvh, trace_rays
from .mesh import TriangleMesh

AMBIENT = 0.2
# Direction towards the light, fixed in world space. Keeping it independent of
# the camera makes every surface point look the same from all views.
LIGHT_DIR = np.array([0.3, 0.5, 1.0]) / np.linalg.norm([0.3, 0.5, 1.0])


@dataclass(frozen=True)
class Hit:
    distance: float
    triangle: int
    barycentrics: tuple


@dataclass
class CaptureFrame:
    rgb: np.ndarray      # (H, W, 3) in [0, 1]
    depth: np.ndarray    # (H, W) Euclidean hit distance, inf on miss
    mask: np.ndarray     # (H, W) bool
    pose: Transform
    cam: PinholeCamera


@dataclass
class Dataset:
    frames: list
    background: tuple = (0.0, 0.0, 0.0)
    mesh_path: str = ""

    def __post_init__(self):
        self.frames = list(self.frames)
        if self.frames:
            cam = self.frames[0].cam
            if any(f.cam != cam for f in self.frames):
                raise ValueError("all frames of a dataset must share one camera")

    @property
    def cam(self) -> PinholeCamera:
        return self.frames[0].cam

    @property
    def poses(self) -> PoseSet:
        return PoseSet(tuple(f.pose for f in self.frames))

    def subset(self, indices) -> "Dataset":
        return Dataset([self.frames[i] for i in indices], self.background, self.mesh_path)

    def __len__(self):
        return len(self.frames)


def mesh_bvh(mesh: TriangleMesh) -> BVH:
    bvh = mesh.__dict__.get("_bvh")
    if bvh is None:
        bvh = build_bvh(mesh.vertices, mesh.triangles)
        mesh.__dict__["_bvh"] = bvh
    return bvh


def intersect(ray: Ray, mesh: TriangleMesh) -> Hit | None:
    t, tri, u, v = trace_rays(mesh_bvh(mesh), ray.origin[None], ray.direction[None])
    if tri[0] < 0:
        return None
    return Hit(float(t[0]), int(tri[0]), (1.0 - u[0] - v[0], float(u[0]), float(v[0])))


def shade(mesh: TriangleMesh, tri, u, v, background, light=LIGHT_DIR) -> np.ndarray:
    """Two-sided Lambert shading of hit points; misses get ``background``."""
    rgb = np.empty((len(tri), 3))
    rgb[:] = background
    hit = tri >= 0
    th = tri[hit]
    if mesh.colors is not None:
        w = np.stack([1.0 - u[hit] - v[hit], u[hit], v[hit]], axis=1)
        base = np.einsum("nk,nkc->nc", w, mesh.colors[mesh.triangles[th]])
    else:
        base = _triangle_colors(mesh)[th]
    normals = _face_normals(mesh)[th]
    lam = np.maximum(AMBIENT, np.abs(normals @ np.asarray(light, dtype=np.float64)))
    rgb[hit] = np.clip(base * lam[:, None], 0.0, 1.0)
    return rgb


def _face_normals(mesh):
    n = mesh.__dict__.get("_normals")
    if n is None:
        n = mesh.__dict__["_normals"] = mesh.face_normals()
    return n


def _triangle_colors(mesh):
    c = mesh.__dict__.get("_tri_colors")
    if c is None:
        c = mesh.__dict__["_tri_colors"] = mesh.triangle_colors()
    return c


def render_frame(mesh: TriangleMesh, cam: PinholeCamera, pose: Transform,
                 background=(0.0, 0.0, 0.0)) -> CaptureFrame:
    origins, dirs = generate_rays(cam, pose)
    t, tri, u, v = trace_rays(mesh_bvh(mesh), origins.reshape(-1, 3), dirs.reshape(-1, 3))
    rgb = shade(mesh, tri, u, v, np.asarray(background, dtype=np.float64))
    shape = (cam.height, cam.width)
    mask = (tri >= 0).reshape(shape)
    depth = np.where(mask.ravel(), t, np.inf).reshape(shape)
    return CaptureFrame(rgb.reshape(shape + (3,)), depth, mask, pose, cam)


def build_dataset(mesh: TriangleMesh, cam: PinholeCamera, poses: PoseSet,
                  background=(0.0, 0.0, 0.0), mesh_path: str = "") -> Dataset:
    if len(poses) == 0:
        raise ValueError("need at least one capture pose")
    bg = tuple(float(x) for x in background)
    frames = [render_frame(mesh, cam, pose, bg) for pose in poses]
    return Dataset(frames, bg, str(mesh_path))
