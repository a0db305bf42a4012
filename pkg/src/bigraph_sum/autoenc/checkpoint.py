"""Binary checkpoint format.

Layout (all integers little-endian uint32)::

    b"BIGAE\\x01"
    len | UTF-8 JSON config block
    per tensor: len | name, rank, dims..., row-major float32 data
    CRC32 of every preceding byte

Tensors are written sorted by name so identical state gives identical bytes.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"BIGAE\x01"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def as_float32(arr: np.ndarray) -> np.ndarray:
    """Round to the stored precision, returned as float64."""
    return np.asarray(arr, dtype="<f4").astype(np.float64)


@dataclass
class ModelCheckpoint:
    config: dict
    params: dict
    adam_m: dict = field(default_factory=dict)
    adam_v: dict = field(default_factory=dict)
    step: int = 0
    embeddings: np.ndarray | None = None

    def tensors(self) -> dict[str, np.ndarray]:
        out = {f"param/{k}": v for k, v in self.params.items()}
        out.update({f"adam.m/{k}": v for k, v in self.adam_m.items()})
        out.update({f"adam.v/{k}": v for k, v in self.adam_v.items()})
        if self.embeddings is not None:
            out["embeddings/word"] = self.embeddings
        return out

    def quantized(self) -> "ModelCheckpoint":
        q = lambda d: {k: as_float32(v) for k, v in d.items()}
        emb = None if self.embeddings is None else as_float32(self.embeddings)
        return ModelCheckpoint(dict(self.config), q(self.params), q(self.adam_m), q(self.adam_v), self.step, emb)

    def to_bytes(self) -> bytes:
        header = dict(self.config, format_version=FORMAT_VERSION, step=self.step)
        blob = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
        parts = [MAGIC, struct.pack("<I", len(blob)), blob]
        for name, arr in sorted(self.tensors().items()):
            raw_name = name.encode("utf-8")
            arr = np.asarray(arr)
            parts.append(struct.pack("<I", len(raw_name)) + raw_name)
            parts.append(struct.pack(f"<{1 + arr.ndim}I", arr.ndim, *arr.shape))
            parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
        body = b"".join(parts)
        return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ModelCheckpoint":
        if len(data) < len(MAGIC) + 8 or not data.startswith(MAGIC):
            raise CheckpointError("not a checkpoint (bad magic)")
        body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
        if zlib.crc32(body) & 0xFFFFFFFF != crc:
            raise CheckpointError("checkpoint CRC mismatch")
        pos = len(MAGIC)

        def take(n):
            nonlocal pos
            if pos + n > len(body):
                raise CheckpointError("truncated checkpoint")
            chunk = body[pos : pos + n]
            pos += n
            return chunk

        (hlen,) = struct.unpack("<I", take(4))
        config = json.loads(take(hlen).decode("utf-8"))
        if config.pop("format_version", None) != FORMAT_VERSION:
            raise CheckpointError("unsupported checkpoint version")
        step = int(config.pop("step", 0))
        tensors = {}
        while pos < len(body):
            (nlen,) = struct.unpack("<I", take(4))
            name = take(nlen).decode("utf-8")
            (rank,) = struct.unpack("<I", take(4))
            shape = struct.unpack(f"<{rank}I", take(4 * rank))
            count = int(np.prod(shape)) if rank else 1
            arr = np.frombuffer(take(4 * count), dtype="<f4").reshape(shape)
            tensors[name] = arr.astype(np.float64)
        groups: dict = {"param": {}, "adam.m": {}, "adam.v": {}}
        embeddings = None
        for name, arr in tensors.items():
            prefix, _, key = name.partition("/")
            if name == "embeddings/word":
                embeddings = arr
            elif prefix in groups:
                groups[prefix][key] = arr
            else:
                raise CheckpointError(f"unknown tensor {name!r}")
        return cls(config, groups["param"], groups["adam.m"], groups["adam.v"], step, embeddings)

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(self.to_bytes())
        tmp.replace(path)
        return path

    @classmethod
    def load(cls, path) -> "ModelCheckpoint":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"checkpoint not found: {path}")
        return cls.from_bytes(path.read_bytes())
