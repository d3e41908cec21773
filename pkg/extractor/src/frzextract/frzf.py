"""FRZF wire format, implemented against the documented byte layout.

This module is intentionally standalone: the binary format is the contract
between the exporter and its consumers, so nothing here imports the
consuming library. All integers little-endian; payloads are float32 LE,
layer-major (layer 0 block first, each block T x d row-major).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"FRZF"
VERSION = 1


class FrzfError(ValueError):
    pass


def write_frzf(path, dim: int, layers: int, records, extractor: str) -> None:
    """Stream (id, [L, T, d] float array) records to an FRZF file."""
    seen: set[str] = set()
    with open(Path(path), "wb") as fh:
        name = extractor.encode("utf-8")
        fh.write(MAGIC)
        fh.write(struct.pack("<HII", VERSION, dim, layers))
        fh.write(struct.pack("<I", len(name)))
        fh.write(name)
        for rec_id, block in records:
            if rec_id in seen:
                raise FrzfError(f"duplicate record id {rec_id!r}")
            seen.add(rec_id)
            arr = np.asarray(block, dtype="<f4")
            if arr.ndim != 3 or arr.shape[0] != layers or arr.shape[2] != dim:
                raise FrzfError(f"record {rec_id!r}: expected [L={layers}, T, d={dim}], got {arr.shape}")
            rid = rec_id.encode("utf-8")
            fh.write(struct.pack("<I", len(rid)))
            fh.write(rid)
            fh.write(struct.pack("<I", arr.shape[1]))
            fh.write(arr.tobytes(order="C"))


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FrzfError(f"truncated file while reading {what}")
    return buf


def read_frzf(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read header metadata and all [L, T, d] blocks (used by verify)."""
    with open(Path(path), "rb") as fh:
        if fh.read(4) != MAGIC:
            raise FrzfError("bad magic; not an FRZF file")
        version, dim, layers = struct.unpack("<HII", _read_exact(fh, 10, "header"))
        if version != VERSION:
            raise FrzfError(f"unsupported version {version}")
        (name_len,) = struct.unpack("<I", _read_exact(fh, 4, "name length"))
        extractor = _read_exact(fh, name_len, "extractor name").decode("utf-8")
        blocks: dict[str, np.ndarray] = {}
        while True:
            raw = fh.read(4)
            if not raw:
                break
            if len(raw) != 4:
                raise FrzfError("truncated record header")
            (id_len,) = struct.unpack("<I", raw)
            rec_id = _read_exact(fh, id_len, "record id").decode("utf-8")
            (t_len,) = struct.unpack("<I", _read_exact(fh, 4, "seq_len"))
            payload = _read_exact(fh, layers * t_len * dim * 4, f"payload {rec_id!r}")
            blocks[rec_id] = np.frombuffer(payload, dtype="<f4").reshape(layers, t_len, dim)
    return {"version": version, "dim": dim, "layers": layers, "extractor": extractor}, blocks
