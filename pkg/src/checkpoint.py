"""Binary checkpoint files.

Layout (all integers unsigned 32-bit little-endian)::

    b"SPPC" | version | len | JSON {config, metadata} |
    for each parameter: len | name | rank | dims... | float32 LE data |
    CRC-32 of everything before it
"""

import json
import logging
import struct
import zlib
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from .errors import CheckpointVersionError, CorruptCheckpointError
from .model import ModelCheckpoint, ModelConfig

logger = logging.getLogger(__name__)

MAGIC = b"SPPC"
FORMAT_VERSION = 1

_U32 = struct.Struct("<I")


def _pack_bytes(payload: bytes) -> bytes:
    return _U32.pack(len(payload)) + payload


def encode_checkpoint(checkpoint: ModelCheckpoint, version: int = FORMAT_VERSION) -> bytes:
    header = json.dumps(
        {"config": checkpoint.config.to_dict(), "metadata": checkpoint.metadata},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    parts = [MAGIC, _U32.pack(version), _pack_bytes(header)]
    for name, value in checkpoint.params.items():
        array = np.ascontiguousarray(value, dtype="<f4")
        parts.append(_pack_bytes(name.encode("utf-8")))
        parts.append(_U32.pack(array.ndim))
        parts.extend(_U32.pack(dim) for dim in array.shape)
        parts.append(array.tobytes())
    body = b"".join(parts)
    return body + _U32.pack(zlib.crc32(body) & 0xFFFFFFFF)


class _Reader:
    def __init__(self, data: bytes, offset: int):
        self.data = data
        self.offset = offset

    def take(self, count: int) -> bytes:
        if count < 0 or self.offset + count > len(self.data):
            raise CorruptCheckpointError("checkpoint ends unexpectedly")
        chunk = self.data[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())


def decode_checkpoint(data: bytes) -> ModelCheckpoint:
    """
    Parse checkpoint bytes.

    Raises:
        CorruptCheckpointError: bad magic, truncation or checksum mismatch
        CheckpointVersionError: written by another format version
    """
    if len(data) < len(MAGIC) + 8 or data[:4] != MAGIC:
        raise CorruptCheckpointError("not a checkpoint file (bad magic or too short)")
    version = _U32.unpack(data[4:8])[0]
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"checkpoint format version {version} is not supported (expected {FORMAT_VERSION})")
    body, stored = data[:-4], _U32.unpack(data[-4:])[0]
    if zlib.crc32(body) & 0xFFFFFFFF != stored:
        raise CorruptCheckpointError("checksum mismatch")

    reader = _Reader(body, 8)
    try:
        header = json.loads(reader.blob().decode("utf-8"))
        config = ModelConfig.from_dict(header["config"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptCheckpointError(f"unreadable config block: {exc}")

    params: Dict[str, np.ndarray] = {}
    while reader.offset < len(body):
        name = reader.blob().decode("utf-8", errors="strict")
        shape: Tuple[int, ...] = tuple(reader.u32() for _ in range(reader.u32()))
        count = int(np.prod(shape, dtype=np.int64))
        raw = reader.take(4 * count)
        params[name] = np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(shape)
    return ModelCheckpoint(config=config, params=params, metadata=header.get("metadata", {}))


def save_checkpoint(checkpoint: ModelCheckpoint, path: Union[str, Path]):
    path = Path(path)
    data = encode_checkpoint(checkpoint)
    path.write_bytes(data)
    logger.info("wrote checkpoint %s (%d parameters, %d bytes)", path, len(checkpoint.params), len(data))


def load_checkpoint(path: Union[str, Path]) -> ModelCheckpoint:
    path = Path(path)
    checkpoint = decode_checkpoint(path.read_bytes())
    logger.debug("loaded checkpoint %s (%s preset)", path, checkpoint.config.name)
    return checkpoint
