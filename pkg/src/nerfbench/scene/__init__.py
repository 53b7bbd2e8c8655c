from .bvh import BVH, build_bvh, trace_rays
from .capture import (CaptureFrame, Dataset, Hit, build_dataset, intersect,
                      mesh_bvh, render_frame)
from .io import load_dataset, read_pfm, save_dataset, write_pfm
from .mesh import MeshFormatError, TriangleMesh, load_mesh, parse_obj, save_obj

__all__ = [
    "BVH", "CaptureFrame", "Dataset", "Hit", "MeshFormatError", "TriangleMesh",
    "build_bvh", "build_dataset", "intersect", "load_dataset", "load_mesh",
    "mesh_bvh", "parse_obj", "read_pfm", "render_frame", "save_dataset",
    "save_obj", "trace_rays", "write_pfm",
]
