"""Versioned binary container for named tensors.

One file holds any number of named numpy arrays. Layout:

    bytes 0..7    magic ``TENSPAK1``
    bytes 8..11   format version, little-endian uint32
    bytes 12..15  header length H, little-endian uint32
    bytes 16..16+H  UTF-8 JSON header
    payload       raw array bytes, each tensor 64-byte aligned

The header is ``{"tensors": [{"name", "dtype", "shape", "offset",
"nbytes", "crc32"}, ...]}`` with offsets relative to the payload start.
CRC32 checksums are verified on read. Used for the processed-corpus cache
and for model weight files (with a JSON config sidecar).
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"TENSPAK1"
VERSION = 1
_ALIGN = 64


class ContainerError(RuntimeError):
    """Raised for unreadable, corrupt, or mismatched container files."""


def _aligned(offset: int) -> int:
    return (offset + _ALIGN - 1) // _ALIGN * _ALIGN


def write_tensors(path: str | Path, tensors: dict[str, np.ndarray]) -> None:
    """Write named arrays to ``path``, overwriting any existing file."""
    entries = []
    offset = 0
    blobs = []
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        raw = arr.tobytes()
        offset = _aligned(offset)
        entries.append(
            {
                "name": name,
                "dtype": arr.dtype.str,
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": len(raw),
                "crc32": zlib.crc32(raw),
            }
        )
        blobs.append((offset, raw))
        offset += len(raw)

    header = json.dumps({"tensors": entries}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint32(VERSION).tobytes())
        fh.write(np.uint32(len(header)).tobytes())
        fh.write(header)
        payload_start = fh.tell()
        for off, raw in blobs:
            fh.seek(payload_start + off)
            fh.write(raw)


def read_tensors(path: str | Path) -> dict[str, np.ndarray]:
    """Read all tensors from a container file, verifying checksums."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ContainerError(f"{path}: not a tensor container (bad magic)")
        version = int(np.frombuffer(fh.read(4), dtype=np.uint32)[0])
        if version != VERSION:
            raise ContainerError(f"{path}: unsupported container version {version}")
        header_len = int(np.frombuffer(fh.read(4), dtype=np.uint32)[0])
        header = json.loads(fh.read(header_len).decode("utf-8"))
        payload_start = fh.tell()

        out: dict[str, np.ndarray] = {}
        for entry in header["tensors"]:
            fh.seek(payload_start + entry["offset"])
            raw = fh.read(entry["nbytes"])
            if zlib.crc32(raw) != entry["crc32"]:
                raise ContainerError(f"{path}: checksum mismatch for tensor {entry['name']!r}")
            arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"]))
            out[entry["name"]] = arr.reshape(entry["shape"]).copy()
        return out
