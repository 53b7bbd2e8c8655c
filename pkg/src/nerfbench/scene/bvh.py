"""Bounding-volume hierarchy and ray/triangle intersection kernels."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is too old for numba and only produces a warning
    os.environ["NUMBA_THREADING_LAYER"] = "workqueue"

import numba  # noqa: E402

LEAF_SIZE = 4
T_MIN = 1e-6


@dataclass
class BVH:
    lo: np.ndarray        # (N, 3) node box min
    hi: np.ndarray        # (N, 3) node box max
    left: np.ndarray      # (N,) child index, -1 for leaves
    right: np.ndarray
    start: np.ndarray     # leaf triangle range into ``order``
    count: np.ndarray
    order: np.ndarray     # BVH slot -> mesh triangle index
    v0: np.ndarray        # (F, 3) per slot
    e1: np.ndarray
    e2: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.left)


def build_bvh(vertices: np.ndarray, triangles: np.ndarray, leaf_size: int = LEAF_SIZE) -> BVH:
    """Median-split BVH over triangle centroids along the widest centroid axis."""
    tri_v = vertices[triangles]                     # (F, 3, 3)
    tri_lo = tri_v.min(axis=1)
    tri_hi = tri_v.max(axis=1)
    cent = tri_v.mean(axis=1)
    n_tri = len(triangles)
    order = np.arange(n_tri)

    lo, hi, left, right, start, count = [], [], [], [], [], []
    stack = [(0, n_tri, -1, False)]
    while stack:
        s, e, parent, is_right = stack.pop()
        node = len(left)
        idx = order[s:e]
        lo.append(tri_lo[idx].min(axis=0))
        hi.append(tri_hi[idx].max(axis=0))
        left.append(-1)
        right.append(-1)
        start.append(s)
        count.append(e - s)
        if parent >= 0:
            if is_right:
                right[parent] = node
            else:
                left[parent] = node
        if e - s <= leaf_size:
            continue
        c = cent[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        mid = (e - s) // 2
        # stable ordering keeps the build deterministic for equal keys
        part = np.argsort(c[:, axis], kind="stable")
        order[s:e] = idx[part]
        count[node] = 0
        stack.append((s + mid, e, node, True))
        stack.append((s, s + mid, node, False))

    tv = tri_v[order]
    return BVH(
        lo=np.array(lo), hi=np.array(hi),
        left=np.array(left, dtype=np.int64), right=np.array(right, dtype=np.int64),
        start=np.array(start, dtype=np.int64), count=np.array(count, dtype=np.int64),
        order=order.astype(np.int64),
        v0=np.ascontiguousarray(tv[:, 0]),
        e1=np.ascontiguousarray(tv[:, 1] - tv[:, 0]),
        e2=np.ascontiguousarray(tv[:, 2] - tv[:, 0]),
    )


@numba.njit(cache=True, inline="always")
def _hit_triangle(ox, oy, oz, dx, dy, dz, v0, e1, e2, k):
    # Moller-Trumbore; returns (t, u, v) with t = -1 on miss
    px = dy * e2[k, 2] - dz * e2[k, 1]
    py = dz * e2[k, 0] - dx * e2[k, 2]
    pz = dx * e2[k, 1] - dy * e2[k, 0]
    det = e1[k, 0] * px + e1[k, 1] * py + e1[k, 2] * pz
    if det == 0.0:
        return -1.0, 0.0, 0.0
    inv = 1.0 / det
    tx = ox - v0[k, 0]
    ty = oy - v0[k, 1]
    tz = oz - v0[k, 2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return -1.0, 0.0, 0.0
    qx = ty * e1[k, 2] - tz * e1[k, 1]
    qy = tz * e1[k, 0] - tx * e1[k, 2]
    qz = tx * e1[k, 1] - ty * e1[k, 0]
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return -1.0, 0.0, 0.0
    t = (e2[k, 0] * qx + e2[k, 1] * qy + e2[k, 2] * qz) * inv
    return t, u, v


@numba.njit(cache=True, inline="always")
def _box_entry(ox, oy, oz, ix, iy, iz, lo, hi, n):
    # slab test; returns entry distance or inf when the box is missed
    t0 = -np.inf
    t1 = np.inf
    for a in range(3):
        o = ox if a == 0 else (oy if a == 1 else oz)
        inv = ix if a == 0 else (iy if a == 1 else iz)
        if np.isinf(inv):
            if o < lo[n, a] or o > hi[n, a]:
                return np.inf
            continue
        ta = (lo[n, a] - o) * inv
        tb = (hi[n, a] - o) * inv
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
    if t0 > t1 or t1 < T_MIN:
        return np.inf
    return t0


@numba.njit(cache=True, parallel=True)
def _trace(orig, dirs, lo, hi, left, right, start, count, order, v0, e1, e2):
    n_rays = orig.shape[0]
    t_out = np.full(n_rays, np.inf)
    tri_out = np.full(n_rays, -1, dtype=np.int64)
    u_out = np.zeros(n_rays)
    v_out = np.zeros(n_rays)
    for r in numba.prange(n_rays):
        ox, oy, oz = orig[r, 0], orig[r, 1], orig[r, 2]
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        ix = 1.0 / dx if dx != 0.0 else np.inf
        iy = 1.0 / dy if dy != 0.0 else np.inf
        iz = 1.0 / dz if dz != 0.0 else np.inf
        best = np.inf
        best_tri = -1
        bu = 0.0
        bv = 0.0
        stack = np.empty(128, dtype=np.int64)
        sp = 0
        stack[sp] = 0
        sp += 1
        while sp > 0:
            sp -= 1
            n = stack[sp]
            entry = _box_entry(ox, oy, oz, ix, iy, iz, lo, hi, n)
            # misses report inf, which must be pruned even while best is inf
            if entry == np.inf or entry > best:
                continue
            if left[n] < 0:
                for s in range(start[n], start[n] + count[n]):
                    t, u, v = _hit_triangle(ox, oy, oz, dx, dy, dz, v0, e1, e2, s)
                    if t > T_MIN:
                        tri = order[s]
                        if t < best or (t == best and tri < best_tri):
                            best = t
                            best_tri = tri
                            bu = u
                            bv = v
            else:
                stack[sp] = right[n]
                sp += 1
                stack[sp] = left[n]
                sp += 1
        t_out[r] = best
        tri_out[r] = best_tri
        u_out[r] = bu
        v_out[r] = bv
    return t_out, tri_out, u_out, v_out


def trace_rays(bvh: BVH, origins, directions):
    """Nearest hits for a batch of rays.

    Returns ``(t, tri, u, v)`` arrays; misses have ``t = inf`` and ``tri = -1``.
    Barycentric weights of a hit are ``(1 - u - v, u, v)``.
    """
    o = np.ascontiguousarray(np.asarray(origins, dtype=np.float64).reshape(-1, 3))
    d = np.ascontiguousarray(np.asarray(directions, dtype=np.float64).reshape(-1, 3))
    return _trace(o, d, bvh.lo, bvh.hi, bvh.left, bvh.right, bvh.start, bvh.count,
                  bvh.order, bvh.v0, bvh.e1, bvh.e2)
