"""Bit-exact binary persistence of feature blocks, plus preprocessing.

MMFE file layout (all little-endian):

    magic           4 bytes  b"MMFE"
    version         u16      currently 1
    modality_code   u8
    dtype_code      u8       0 = float32 (the only dtype)
    row_count       u64
    dim             u32
    id_table_bytes  u64
    id table        row_count entries of (u16 length, UTF-8 bytes)
    payload         row_count * dim float32 values, row-major

The declared sizes must account for the file length exactly; a mismatch is
rejected on read.  Writes go to a temp file in the target directory and
are renamed into place, so readers never observe a partial file.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .data import FeatureMatrix, Modality
from .errors import BadMagic, BadVersion, DataError, TruncatedFile

MAGIC = b"MMFE"
VERSION = 1
DTYPE_F32 = 0

_HEADER = struct.Struct("<4sHBBQIQ")
HEADER_BYTES = _HEADER.size  # 28


def write_features(m: FeatureMatrix, path) -> None:
    """Serialize a feature block; read_features inverts it bitwise."""
    id_table = bytearray()
    for rid in m.row_ids:
        raw = rid.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise DataError(f"row id longer than 65535 bytes: {rid[:32]!r}...")
        id_table += struct.pack("<H", len(raw)) + raw

    header = _HEADER.pack(
        MAGIC,
        VERSION,
        m.modality.wire_code,
        DTYPE_F32,
        m.num_rows,
        m.dim,
        len(id_table),
    )
    payload = np.ascontiguousarray(m.values, dtype="<f4").tobytes()

    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".mmfe.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(id_table)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_features(path) -> FeatureMatrix:
    """Load an MMFE file, validating magic, version, and declared sizes."""
    with open(path, "rb") as fh:
        blob = fh.read()

    if len(blob) < HEADER_BYTES:
        if blob[:4] != MAGIC and len(blob) >= 4:
            raise BadMagic(f"bad magic: {blob[:4]!r}")
        raise TruncatedFile(f"file is {len(blob)} bytes, header needs {HEADER_BYTES}")
    magic, version, modality_code, dtype_code, row_count, dim, id_table_bytes = (
        _HEADER.unpack_from(blob)
    )
    if magic != MAGIC:
        raise BadMagic(f"bad magic: {magic!r}")
    if version != VERSION:
        raise BadVersion(version)
    if dtype_code != DTYPE_F32:
        raise DataError(f"unsupported dtype code: {dtype_code}")

    expected = HEADER_BYTES + id_table_bytes + row_count * dim * 4
    if len(blob) < expected:
        raise TruncatedFile(f"file is {len(blob)} bytes, header declares {expected}")
    if len(blob) > expected:
        raise DataError(f"{len(blob) - expected} trailing bytes after declared payload")

    row_ids = []
    offset = HEADER_BYTES
    id_end = HEADER_BYTES + id_table_bytes
    for _ in range(row_count):
        if offset + 2 > id_end:
            raise TruncatedFile("id table shorter than declared entry count")
        (length,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        if offset + length > id_end:
            raise TruncatedFile("id entry runs past declared id table")
        row_ids.append(blob[offset : offset + length].decode("utf-8"))
        offset += length
    if offset != id_end:
        raise DataError("id table longer than its declared entries")

    values = np.frombuffer(blob, dtype="<f4", count=row_count * dim, offset=id_end)
    values = values.reshape(row_count, dim).astype(np.float32, copy=True)
    return FeatureMatrix(
        modality=Modality.from_wire_code(modality_code),
        row_ids=tuple(row_ids),
        values=values,
    )


PREPROCESS_METHODS = ("none", "zscore", "minmax", "l2row")


def preprocess(m: FeatureMatrix, method: str) -> FeatureMatrix:
    """Column-wise zscore/minmax, row-wise L2 scaling, or identity.

    Degenerate columns (zero sample std, or max == min) become all zeros
    instead of erroring: real catalogs contain constant feature columns.
    zscore uses the sample std (n-1 denominator); a single-row block is
    degenerate for both column methods.  Math runs in float64 and is cast
    back to the storage dtype.
    """
    if method == "none":
        return m
    if method not in PREPROCESS_METHODS:
        raise DataError(f"unknown preprocess method: {method!r}")

    x = m.values.astype(np.float64)
    if method == "zscore":
        if x.shape[0] < 2:
            out = np.zeros_like(x)
        else:
            mean = x.mean(axis=0)
            std = x.std(axis=0, ddof=1)
            safe = np.where(std > 0.0, std, 1.0)
            out = (x - mean) / safe
            out[:, std == 0.0] = 0.0
    elif method == "minmax":
        lo = x.min(axis=0) if x.shape[0] else np.zeros(x.shape[1])
        hi = x.max(axis=0) if x.shape[0] else np.zeros(x.shape[1])
        span = hi - lo
        safe = np.where(span > 0.0, span, 1.0)
        out = (x - lo) / safe
        out[:, span == 0.0] = 0.0
    else:  # l2row
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        out = np.divide(x, norms, out=np.zeros_like(x), where=norms > 0.0)

    return FeatureMatrix(
        modality=m.modality, row_ids=m.row_ids, values=out.astype(np.float32)
    )


def write_features_tsv(m: FeatureMatrix, path) -> None:
    """Plain-text escape hatch for debugging: id + floats per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for rid, row in zip(m.row_ids, m.values):
            fh.write(rid + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")
