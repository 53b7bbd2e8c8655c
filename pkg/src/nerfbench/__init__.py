"""Tiny-NeRF versus point cloud, voxel and mesh reconstructions of one object."""

__version__ = "0.1.0"
