"""Binary descriptor-file interface for ingesting precomputed descriptors.

Byte layout, all integers little-endian, no padding::

    magic  'VPRD' (4 bytes)
    version        u16 = 1
    technique_id   u8 length + UTF-8 bytes (<= 64)
    count          u32   rows (images)
    dim            u32   elements per row
    manifest       count entries of: u16 name length + UTF-8 bytes
    payload        count * dim little-endian float32, row-major

Values are serialized as 32-bit floats even though internal math is 64-bit;
the payload byte count is the memory-footprint unit of account.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DescriptorVector
from .exceptions import (
    BadMagicError,
    DescriptorFileError,
    DimensionMismatchError,
    IoFailure,
    NonFiniteValueError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)

MAGIC = b"VPRD"
VERSION = 1
MAX_TECHNIQUE_ID_BYTES = 64


@dataclass(frozen=True)
class DescriptorFile:
    """Parsed contents of a descriptor file."""

    technique_id: str
    rows: np.ndarray  # (count, dim) float32
    names: tuple[str, ...]

    @property
    def count(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def footprint_bytes(row) -> int:
    """Serialized size of one descriptor: dim * 4 bytes (32-bit floats)."""
    if isinstance(row, DescriptorVector):
        return row.dim * 4
    if isinstance(row, (int, np.integer)):
        return int(row) * 4
    return int(np.asarray(row).reshape(-1).size) * 4


def _coerce_rows(rows) -> tuple[np.ndarray, str | None]:
    if isinstance(rows, np.ndarray):
        a = np.ascontiguousarray(rows, dtype=np.float32)
        if a.ndim != 2:
            raise DimensionMismatchError(f"expected (count, dim) rows, got shape {a.shape}")
        return a, None
    rows = list(rows)
    if not rows:
        raise DimensionMismatchError("need at least one descriptor row")
    technique_id = rows[0].technique_id if isinstance(rows[0], DescriptorVector) else None
    flat = []
    dim = None
    for i, r in enumerate(rows):
        v = r.values if isinstance(r, DescriptorVector) else np.asarray(r, dtype=np.float64).reshape(-1)
        if dim is None:
            dim = v.size
        elif v.size != dim:
            raise DimensionMismatchError(f"row {i} has dim {v.size}, expected {dim}")
        flat.append(v)
    return np.asarray(flat, dtype=np.float32), technique_id


def write_descriptor_file(rows, names, path, technique_id: str | None = None) -> None:
    """Write rows + manifest to the binary layout; fsync-complete on return.

    Validation (equal dims, unique names, finite values, id length) happens
    before any bytes reach the filesystem.
    """
    data, inferred = _coerce_rows(rows)
    tid = technique_id if technique_id is not None else (inferred or "external")
    tid_bytes = tid.encode("utf-8")
    if not 0 < len(tid_bytes) <= MAX_TECHNIQUE_ID_BYTES:
        raise ValueError(f"technique_id must be 1..{MAX_TECHNIQUE_ID_BYTES} UTF-8 bytes")
    names = [str(n) for n in names]
    if len(names) != data.shape[0]:
        raise DimensionMismatchError(
            f"{len(names)} names for {data.shape[0]} rows"
        )
    if len(set(names)) != len(names):
        raise ValueError("manifest names must be unique")
    if data.shape[0] < 1 or data.shape[1] < 1:
        raise DimensionMismatchError("descriptor file needs at least one row and one column")
    bad = ~np.isfinite(data)
    if bad.any():
        row_index = int(np.argwhere(bad.any(axis=1))[0][0])
        raise NonFiniteValueError(f"row {row_index} holds a non-finite value")

    parts = [MAGIC, struct.pack("<H", VERSION), struct.pack("<B", len(tid_bytes)), tid_bytes,
             struct.pack("<II", data.shape[0], data.shape[1])]
    for name in names:
        nb = name.encode("utf-8")
        if len(nb) > 0xFFFF:
            raise ValueError(f"manifest name too long: {name[:32]}...")
        parts.append(struct.pack("<H", len(nb)))
        parts.append(nb)
    parts.append(data.astype("<f4").tobytes(order="C"))

    try:
        with open(path, "wb") as fh:
            fh.write(b"".join(parts))
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as exc:
        raise IoFailure(f"cannot write descriptor file {path}: {exc}") from exc


class _Cursor:
    """Sequential reader that turns short reads into TruncatedPayloadError."""

    def __init__(self, data: bytes, path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise TruncatedPayloadError(f"{self.path}: file ends inside {what}")
        piece = self.data[self.offset:self.offset + n]
        self.offset += n
        return piece

    def remaining(self) -> int:
        return len(self.data) - self.offset


def read_descriptor_file(path) -> DescriptorFile:
    """Parse and validate a descriptor file.

    The header and manifest are validated before the payload is touched, so a
    corrupt file never triggers a payload-sized allocation.
    """
    data = Path(path).read_bytes()
    cur = _Cursor(data, path)

    if cur.take(4, "magic") != MAGIC:
        raise BadMagicError(f"{path} does not start with the descriptor magic")
    (version,) = struct.unpack("<H", cur.take(2, "version"))
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: version {version} not supported")
    (tid_len,) = struct.unpack("<B", cur.take(1, "technique id length"))
    if tid_len == 0 or tid_len > MAX_TECHNIQUE_ID_BYTES:
        raise DescriptorFileError(f"{path}: technique id length {tid_len} out of range")
    try:
        technique_id = cur.take(tid_len, "technique id").decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DescriptorFileError(f"{path}: technique id is not UTF-8") from exc
    count, dim = struct.unpack("<II", cur.take(8, "count/dim"))
    if count < 1 or dim < 1:
        raise DescriptorFileError(f"{path}: count and dim must be >= 1, got {count}, {dim}")

    names = []
    for i in range(count):
        (name_len,) = struct.unpack("<H", cur.take(2, f"manifest entry {i}"))
        try:
            names.append(cur.take(name_len, f"manifest entry {i}").decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise DescriptorFileError(f"{path}: manifest entry {i} is not UTF-8") from exc
    if len(set(names)) != len(names):
        raise DescriptorFileError(f"{path}: manifest names are not unique")

    payload_bytes = count * dim * 4
    if cur.remaining() < payload_bytes:
        raise TruncatedPayloadError(
            f"{path}: payload needs {payload_bytes} bytes, only {cur.remaining()} present"
        )
    if cur.remaining() > payload_bytes:
        raise DescriptorFileError(f"{path}: {cur.remaining() - payload_bytes} trailing bytes")
    rows = np.frombuffer(cur.take(payload_bytes, "payload"), dtype="<f4").reshape(count, dim).copy()

    finite = np.isfinite(rows).all(axis=1)
    if not finite.all():
        raise NonFiniteValueError(f"{path}: row {int(np.argmin(finite))} holds a non-finite value")
    rows.flags.writeable = False
    return DescriptorFile(technique_id=technique_id, rows=rows, names=tuple(names))
