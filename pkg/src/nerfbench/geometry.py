"""Poses, pinhole cameras and ray generation.

Cameras follow the OpenGL convention: the camera looks down its local -Z
axis, +Y is up and +X is right. Image row 0 is the top of the image.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

ORTHO_TOL = 1e-6
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class Transform:
    """Rigid camera-to-world transform with rotation ``r`` and position ``p``."""

    r: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=np.float64).reshape(3, 3)
        p = np.array(self.p, dtype=np.float64).reshape(3)
        ortho_err = np.abs(r.T @ r - np.eye(3)).max()
        if not ortho_err < ORTHO_TOL:
            raise ValueError(f"rotation is not orthonormal: |R^T R - I|_inf = {ortho_err:.3e}")
        det = np.linalg.det(r)
        if abs(det - 1.0) > ORTHO_TOL:
            raise ValueError(f"rotation has determinant {det:.6f}, expected 1")
        if not np.all(np.isfinite(p)):
            raise ValueError("position must be finite")
        r.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "p", p)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.r
        m[:3, 3] = self.p
        return m

    @classmethod
    def from_matrix(cls, m) -> "Transform":
        m = np.asarray(m, dtype=np.float64).reshape(4, 4)
        if not np.array_equal(m[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError(f"bottom row must be (0, 0, 0, 1), got {m[3].tolist()}")
        return cls(m[:3, :3], m[:3, 3])

    def apply(self, points) -> np.ndarray:
        """Map camera-frame points to world coordinates."""
        return np.asarray(points) @ self.r.T + self.p

    def inverse_apply(self, points) -> np.ndarray:
        """Map world points into the camera frame."""
        return (np.asarray(points) - self.p) @ self.r

    @property
    def forward(self) -> np.ndarray:
        return -self.r[:, 2]

    def __eq__(self, other):
        if not isinstance(other, Transform):
            return NotImplemented
        return np.array_equal(self.r, other.r) and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash((self.r.tobytes(), self.p.tobytes()))


def compose_transform(r, p) -> Transform:
    return Transform(r, p)


def rotation_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def look_at(eye, target, up=(0.0, 1.0, 0.0)) -> Transform:
    """Camera-to-world pose at ``eye`` whose -Z axis points at ``target``."""
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    up = np.asarray(up, dtype=np.float64)
    delta = target - eye
    dist = np.linalg.norm(delta)
    if dist == 0.0:
        raise ValueError("look_at: eye and target coincide")
    fwd = delta / dist
    right = np.cross(fwd, up)
    rn = np.linalg.norm(right)
    if rn < 1e-9 * max(np.linalg.norm(up), 1.0):
        raise ValueError("look_at: up vector is parallel to the viewing direction")
    right = right / rn
    true_up = np.cross(right, fwd)
    r = np.stack([right, true_up, -fwd], axis=1)
    return Transform(r, eye)


@dataclass(frozen=True)
class PinholeCamera:
    fov_y: float = 17.70
    width: int = 100
    height: int = 100
    near: float = 0.05
    far: float = 100.0

    def __post_init__(self):
        if not 0.0 < self.fov_y < 180.0:
            raise ValueError(f"fov_y must lie in (0, 180) degrees, got {self.fov_y}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be at least 1x1, got {self.width}x{self.height}")
        if not 0.0 < self.near < self.far:
            raise ValueError(f"need 0 < near < far, got near={self.near}, far={self.far}")

    @property
    def tan_half_y(self) -> float:
        return math.tan(math.radians(self.fov_y) / 2.0)

    @property
    def tan_half_x(self) -> float:
        # square pixels: horizontal extent scales with the aspect ratio
        return self.tan_half_y * self.width / self.height

    def to_dict(self) -> dict:
        return {"fov_y": self.fov_y, "width": self.width, "height": self.height,
                "near": self.near, "far": self.far}

    @classmethod
    def from_dict(cls, d: dict) -> "PinholeCamera":
        return cls(float(d["fov_y"]), int(d["width"]), int(d["height"]),
                   float(d["near"]), float(d["far"]))


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=np.float64).reshape(3)
        d = np.asarray(self.direction, dtype=np.float64).reshape(3)
        n = np.linalg.norm(d)
        if n == 0.0:
            raise ValueError("ray direction must be nonzero")
        if abs(n - 1.0) > 1e-9:
            d = d / n
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)


def camera_directions(cam: PinholeCamera) -> np.ndarray:
    """Unit camera-frame directions through every pixel center, shape (H, W, 3)."""
    i = np.arange(cam.width, dtype=np.float64)
    j = np.arange(cam.height, dtype=np.float64)
    x = (2.0 * (i + 0.5) / cam.width - 1.0) * cam.tan_half_x
    y = (1.0 - 2.0 * (j + 0.5) / cam.height) * cam.tan_half_y
    d = np.empty((cam.height, cam.width, 3))
    d[..., 0] = x[None, :]
    d[..., 1] = y[:, None]
    d[..., 2] = -1.0
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def generate_rays(cam: PinholeCamera, pose: Transform) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel world rays as ``(origins, directions)``, each of shape (H, W, 3)."""
    d = camera_directions(cam) @ pose.r.T
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    o = np.broadcast_to(pose.p, d.shape).copy()
    return o, d


def project_points(cam: PinholeCamera, pose: Transform, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pixel (row, col) indices of world points plus an in-front-of-camera flag.

    Inverse of the pixel-center mapping used by :func:`generate_rays`; indices
    may fall outside the image.
    """
    pc = np.asarray(points, dtype=np.float64) - pose.p
    pc = pc @ pose.r
    depth = -pc[..., 2]
    front = depth > 0.0
    safe = np.where(front, depth, 1.0)
    u = pc[..., 0] / safe / cam.tan_half_x
    v = pc[..., 1] / safe / cam.tan_half_y
    col = np.floor((u + 1.0) * (cam.width / 2.0))
    row = np.floor((1.0 - v) * (cam.height / 2.0))
    return row, col, front


@dataclass(frozen=True)
class PoseSet:
    poses: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))

    @property
    def count(self) -> int:
        return len(self.poses)

    def __len__(self):
        return len(self.poses)

    def __iter__(self):
        return iter(self.poses)

    def __getitem__(self, i):
        return self.poses[i]

    def to_json(self) -> str:
        rows = [[float(x) for x in t.as_matrix().ravel()] for t in self.poses]
        return json.dumps({"convention": "opengl", "poses": rows})

    @classmethod
    def from_json(cls, text: str) -> "PoseSet":
        doc = json.loads(text)
        if doc.get("convention") != "opengl":
            raise ValueError(f"unsupported pose convention {doc.get('convention')!r}")
        return cls(tuple(Transform.from_matrix(np.array(m).reshape(4, 4)) for m in doc["poses"]))


def sample_capture_poses(n: int = 106, radius: float = 8.0, target=(0.0, 0.0, 0.0),
                         hemisphere: bool = True) -> PoseSet:
    """Deterministic Fibonacci-lattice poses on a sphere around ``target``.

    Heights run from the +Z pole down to the equator (``hemisphere``) or to the
    -Z pole, with azimuth advancing by the golden angle. World up is +Z; the
    polar cameras fall back to +Y as their up hint.
    """
    if n < 1:
        raise ValueError(f"need at least one pose, got n={n}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    target = np.asarray(target, dtype=np.float64)
    span = 1.0 if hemisphere else 2.0
    poses = []
    for i in range(n):
        z = 1.0 if n == 1 else 1.0 - span * i / (n - 1)
        rho = math.sqrt(max(0.0, 1.0 - z * z))
        phi = i * GOLDEN_ANGLE
        unit = np.array([rho * math.cos(phi), rho * math.sin(phi), z])
        eye = target + radius * unit
        up = (0.0, 1.0, 0.0) if rho < 1e-6 else (0.0, 0.0, 1.0)
        poses.append(look_at(eye, target, up))
    return PoseSet(tuple(poses))
