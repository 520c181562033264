"""RLZC checkpoints: named float32 tensors behind a magic and a version word."""

from __future__ import annotations

import os
import struct
from collections import OrderedDict
from pathlib import Path

import numpy as np

from ..ndiff.serialize import tensor_deserialize, tensor_serialize
from ..ndiff.tensor import ShapeMismatch as _TensorShapeMismatch
from ..ndiff.tensor import Tensor, TruncatedBuffer

MAGIC = b"RLZC"
VERSION = 1


class CheckpointError(Exception):
    pass


class BadMagic(CheckpointError, ValueError):
    pass


class ShapeMismatch(CheckpointError, _TensorShapeMismatch):
    pass


class MissingParam(CheckpointError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


def encode_checkpoint(tensors: "OrderedDict[str, object]") -> bytes:
    parts = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, t in tensors.items():
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(tensor_serialize(np.asarray(t.data, dtype=np.float32)))
    return b"".join(parts)


def decode_checkpoint(buf: bytes) -> "OrderedDict[str, np.ndarray]":
    if buf[:4] != MAGIC:
        raise BadMagic(f"not an RLZC checkpoint (magic {buf[:4]!r})")
    if len(buf) < 12:
        raise TruncatedBuffer("checkpoint header is truncated")
    version, count = struct.unpack_from("<II", buf, 4)
    if version != VERSION:
        raise BadMagic(f"unsupported checkpoint version {version}")
    off = 12
    out = OrderedDict()
    for _ in range(count):
        if off + 4 > len(buf):
            raise TruncatedBuffer("checkpoint ends inside a name length")
        (n,) = struct.unpack_from("<I", buf, off)
        off += 4
        if off + n > len(buf):
            raise TruncatedBuffer("checkpoint ends inside a tensor name")
        name = buf[off:off + n].decode("utf-8")
        off += n
        t, off = tensor_deserialize(buf, off, return_offset=True)
        out[name] = t.data
    if off != len(buf):
        raise CheckpointError(f"{len(buf) - off} trailing bytes after the last tensor")
    return out


def checkpoint_save(agent, path) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode_checkpoint(agent.named_tensors()))
    os.replace(tmp, path)
    return path


def checkpoint_load(agent, path) -> None:
    """Restore every named tensor of ``agent``; nothing is written unless all names and shapes match."""
    stored = decode_checkpoint(Path(path).read_bytes())
    own = agent.named_tensors()
    for name, t in own.items():
        if name not in stored:
            raise MissingParam(f"checkpoint has no tensor {name!r}")
        if tuple(stored[name].shape) != tuple(t.shape):
            raise ShapeMismatch(f"tensor {name!r}: checkpoint shape {tuple(stored[name].shape)}, "
                                f"agent shape {tuple(t.shape)}")
    extra = [n for n in stored if n not in own]
    if extra:
        raise MissingParam(f"agent has no parameter {extra[0]!r} found in the checkpoint")
    for name, t in own.items():
        if isinstance(t, Tensor):
            t.data[...] = stored[name]
        else:
            t.data = stored[name]
