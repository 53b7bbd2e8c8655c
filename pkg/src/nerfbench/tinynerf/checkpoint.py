"""Binary model checkpoints.

Layout, little-endian throughout::

    64-byte header:
        magic "TNRF" | u32 version=1 | u32 n_freqs | u8 include_identity
        u32 layer_count | u32 widths[layer_count + 1] | zero padding
    per layer: float32 weights (rows x cols, row-major), float32 biases (cols)

Layer ``i`` has ``rows = widths[i]`` and ``cols = widths[i + 1]``, so the
full-size network stores nothing but its parameters after the header.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .encoding import EncodingConfig
from .mlp import MlpModel

MAGIC = b"TNRF"
VERSION = 1
HEADER_SIZE = 64
_FIXED = struct.Struct("<4sIIBI")
MAX_LAYERS = (HEADER_SIZE - _FIXED.size) // 4 - 1


class CheckpointError(ValueError):
    pass


def checkpoint_size(model: MlpModel) -> int:
    return HEADER_SIZE + 4 * model.param_count()


def save_model(model: MlpModel, path) -> int:
    n = len(model.layers)
    if n > MAX_LAYERS:
        raise ValueError(f"checkpoint header holds at most {MAX_LAYERS} layers, model has {n}")
    head = _FIXED.pack(MAGIC, VERSION, model.encoding.n_freqs, int(model.encoding.include_identity), n)
    head += struct.pack(f"<{n + 1}I", *model.widths)
    head = head.ljust(HEADER_SIZE, b"\0")
    body = b"".join(np.ascontiguousarray(a, dtype="<f4").tobytes() for a in model.params())
    Path(path).write_bytes(head + body)
    return len(head) + len(body)


def load_model(path) -> MlpModel:
    blob = Path(path).read_bytes()
    if len(blob) < HEADER_SIZE:
        raise CheckpointError(f"file is {len(blob)} bytes, shorter than the header")
    magic, version, n_freqs, ident, n = _FIXED.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported version {version}")
    if not 1 <= n <= MAX_LAYERS:
        raise CheckpointError(f"invalid layer count {n}")
    widths = struct.unpack_from(f"<{n + 1}I", blob, _FIXED.size)
    enc = EncodingConfig(n_freqs, bool(ident))
    if widths[0] != enc.dim:
        raise CheckpointError(f"input width {widths[0]} does not match encoding dimension {enc.dim}")
    expected = HEADER_SIZE + 4 * sum(r * c + c for r, c in zip(widths[:-1], widths[1:]))
    if len(blob) != expected:
        raise CheckpointError(f"expected {expected} bytes for widths {list(widths)}, found {len(blob)}")
    off = HEADER_SIZE
    layers = []
    for r, c in zip(widths[:-1], widths[1:]):
        w = np.frombuffer(blob, dtype="<f4", count=r * c, offset=off).reshape(r, c).astype(np.float32)
        off += 4 * r * c
        b = np.frombuffer(blob, dtype="<f4", count=c, offset=off).astype(np.float32)
        off += 4 * c
        layers.append((w, b))
    try:
        return MlpModel(enc, layers)
    except ValueError as exc:
        raise CheckpointError(str(exc)) from None
