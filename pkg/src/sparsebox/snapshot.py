"""Binary field snapshots.

Layout (little endian):
    magic   4s   b"SPLB"
    version u32  (currently 1)
    n       u32  grid points per axis
    ncomp   u32  component count (3)
    role    4s   field role tag, e.g. b"velo" / b"vort" / b"genr"
    box     f64  physical period
    t       f64  simulation time
    payload ncomp * n^3 f64, C order
    crc     u32  CRC-32 of the payload bytes
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .grid import PeriodicField, grid_for

MAGIC = b"SPLB"
VERSION = 1
_HEADER = struct.Struct("<4sIII4sdd")


class SnapshotError(IOError):
    pass


class SnapshotMagicError(SnapshotError):
    pass


class SnapshotVersionError(SnapshotError):
    pass


class SnapshotTruncatedError(SnapshotError):
    pass


class SnapshotChecksumError(SnapshotError):
    pass


@dataclass(frozen=True)
class SnapshotMeta:
    n: int
    ncomp: int
    role: str
    box_length: float
    t: float
    version: int = VERSION


def save_snapshot(f: PeriodicField, path, role: str = "velo", t: float = 0.0) -> SnapshotMeta:
    """Write the field; the byte stream round-trips the data bit-exactly."""
    role_bytes = role.encode("ascii")[:4].ljust(4, b"\0")
    payload = np.ascontiguousarray(f.data, dtype="<f8").tobytes()
    header = _HEADER.pack(MAGIC, VERSION, f.grid.n, 3, role_bytes, f.grid.length, float(t))
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(struct.pack("<I", crc))
    return SnapshotMeta(f.grid.n, 3, role_bytes.rstrip(b"\0").decode("ascii"), f.grid.length, t)


def load_snapshot(path) -> tuple[PeriodicField, SnapshotMeta]:
    """Read and verify a snapshot; corrupt, truncated or mismatched files raise."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size + 4:
        raise SnapshotTruncatedError(f"{path}: file shorter than the fixed header")
    magic, version, n, ncomp, role, box_length, t = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise SnapshotMagicError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotVersionError(
            f"{path}: incompatible snapshot version {version} (supported: {VERSION})"
        )
    expected_payload = ncomp * n**3 * 8
    body = blob[_HEADER.size :]
    if len(body) != expected_payload + 4:
        raise SnapshotTruncatedError(
            f"{path}: expected {expected_payload + 4} bytes after header, got {len(body)}"
        )
    payload = body[:-4]
    (crc_stored,) = struct.unpack("<I", body[-4:])
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    if crc != crc_stored:
        raise SnapshotChecksumError(
            f"{path}: checksum mismatch (stored {crc_stored:#010x}, computed {crc:#010x})"
        )
    data = np.frombuffer(payload, dtype="<f8").reshape(ncomp, n, n, n)
    field = PeriodicField(grid_for(n, box_length), data)
    meta = SnapshotMeta(n, ncomp, role.rstrip(b"\0").decode("ascii"), box_length, t, version)
    return field, meta
