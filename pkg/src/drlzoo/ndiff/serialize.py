"""Byte layout shared by checkpoints and the wire protocol.

``rank:u32 | dims:u32*rank | data:f32*prod(dims)``, all little endian.
"""

from __future__ import annotations

import struct

import numpy as np

from .tensor import Tensor, TruncatedBuffer


def tensor_serialize(t) -> bytes:
    data = t.data if isinstance(t, Tensor) else np.asarray(t)
    data = np.ascontiguousarray(data, dtype="<f4")
    head = struct.pack(f"<I{data.ndim}I", data.ndim, *data.shape)
    return head + data.tobytes()


def tensor_deserialize(buf: bytes, offset: int = 0, return_offset: bool = False):
    mv = memoryview(buf)
    if len(mv) - offset < 4:
        raise TruncatedBuffer("buffer too short for tensor rank")
    (rank,) = struct.unpack_from("<I", mv, offset)
    offset += 4
    if len(mv) - offset < 4 * rank:
        raise TruncatedBuffer(f"buffer too short for {rank} dims")
    dims = struct.unpack_from(f"<{rank}I", mv, offset)
    offset += 4 * rank
    n = int(np.prod(dims, dtype=np.int64)) if rank else 1
    if len(mv) - offset < 4 * n:
        raise TruncatedBuffer(f"buffer too short for {n} float32 values")
    data = np.frombuffer(mv, dtype="<f4", count=n, offset=offset).astype(np.float32).reshape(dims)
    offset += 4 * n
    t = Tensor(data)
    return (t, offset) if return_offset else t


def pack_tensors(tensors) -> bytes:
    """Length-prefixed list of serialized tensors."""
    parts = [struct.pack("<I", len(tensors))]
    for t in tensors:
        blob = tensor_serialize(t)
        parts.append(struct.pack("<I", len(blob)))
        parts.append(blob)
    return b"".join(parts)


def unpack_tensors(buf: bytes) -> list[Tensor]:
    mv = memoryview(buf)
    if len(mv) < 4:
        raise TruncatedBuffer("buffer too short for tensor count")
    (count,) = struct.unpack_from("<I", mv, 0)
    off = 4
    out = []
    for _ in range(count):
        if len(mv) - off < 4:
            raise TruncatedBuffer("buffer too short for tensor length")
        (n,) = struct.unpack_from("<I", mv, off)
        off += 4
        if len(mv) - off < n:
            raise TruncatedBuffer("tensor blob cut short")
        out.append(tensor_deserialize(bytes(mv[off:off + n])))
        off += n
    return out
