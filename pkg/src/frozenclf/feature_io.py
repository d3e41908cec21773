"""Frozen-extractor feature files (FRZF) and static word-embedding tables.

The FRZF wire format (all integers little-endian, see docs/formats.md):

    header:  magic "FRZF" | version u16 (=1) | dim d u32 | layer count L u32
             | extractor name (u32 byte length + UTF-8 bytes)
    records: id (u32 byte length + UTF-8 bytes) | seq_len T u32
             | L*T*d float32 LE payload, layer-major (layer 0 block first,
               each block T*d row-major)
    records repeat until end of file; ids must be unique.

Loaders return immutable data and are safe for concurrent reads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"FRZF"
VERSION = 1

VIEWS = ("final_layer", "first_layer", "concat_last4", "first_token_final")


class FeatureFileError(ValueError):
    """Malformed, truncated or contract-violating FRZF content."""


class EmbeddingFormatError(ValueError):
    """Malformed embedding text file."""


@dataclass(frozen=True)
class FeatureSequence:
    """A T×d' matrix of token representations plus its true-length mask."""

    matrix: np.ndarray  # float32 [T, d']
    mask: np.ndarray  # bool [T]

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] < 1:
            raise FeatureFileError(f"feature matrix must be T×d with T >= 1, got {self.matrix.shape}")
        if self.mask.shape != (self.matrix.shape[0],):
            raise FeatureFileError("mask length must equal sequence length")

    @property
    def length(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def _full_mask(t: int) -> np.ndarray:
    return np.ones(t, dtype=bool)


def write_features(path, dim: int, layers: int, records, extractor: str = "unknown") -> None:
    """Write an FRZF file; ``records`` yields (id, array[L, T, d]) pairs."""
    path = Path(path)
    seen: set[str] = set()
    with open(path, "wb") as fh:
        name = extractor.encode("utf-8")
        fh.write(MAGIC)
        fh.write(struct.pack("<HII", VERSION, dim, layers))
        fh.write(struct.pack("<I", len(name)))
        fh.write(name)
        for rec_id, block in records:
            if rec_id in seen:
                raise FeatureFileError(f"duplicate record id {rec_id!r}")
            seen.add(rec_id)
            arr = np.asarray(block, dtype=np.float32)
            if arr.ndim != 3 or arr.shape[0] != layers or arr.shape[2] != dim:
                raise FeatureFileError(
                    f"record {rec_id!r} must be [L={layers}, T, d={dim}], got {arr.shape}")
            if arr.shape[1] < 1:
                raise FeatureFileError(f"record {rec_id!r} has empty sequence")
            rid = rec_id.encode("utf-8")
            fh.write(struct.pack("<I", len(rid)))
            fh.write(rid)
            fh.write(struct.pack("<I", arr.shape[1]))
            fh.write(arr.astype("<f4").tobytes(order="C"))


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FeatureFileError(f"truncated file while reading {what} ({len(buf)}/{n} bytes)")
    return buf


def read_raw_features(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read header metadata and all per-id [L, T, d] blocks."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise FeatureFileError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, dim, layers = struct.unpack("<HII", _read_exact(fh, 10, "header"))
        if version != VERSION:
            raise FeatureFileError(f"unsupported format version {version}")
        (name_len,) = struct.unpack("<I", _read_exact(fh, 4, "name length"))
        extractor = _read_exact(fh, name_len, "extractor name").decode("utf-8")
        header = {"version": version, "dim": dim, "layers": layers, "extractor": extractor}
        blocks: dict[str, np.ndarray] = {}
        while True:
            len_bytes = fh.read(4)
            if not len_bytes:
                break
            if len(len_bytes) != 4:
                raise FeatureFileError("truncated record id length")
            (id_len,) = struct.unpack("<I", len_bytes)
            rec_id = _read_exact(fh, id_len, "record id").decode("utf-8")
            if rec_id in blocks:
                raise FeatureFileError(f"duplicate record id {rec_id!r}")
            (t_len,) = struct.unpack("<I", _read_exact(fh, 4, "seq_len"))
            payload = _read_exact(fh, layers * t_len * dim * 4, f"payload of {rec_id!r}")
            blocks[rec_id] = np.frombuffer(payload, dtype="<f4").reshape(layers, t_len, dim).astype(np.float32)
    return header, blocks


def load_features(path, view: str = "final_layer") -> dict[str, FeatureSequence]:
    """Load an FRZF file and apply a layer-selection view.

    Views index the *stored* layers: ``final_layer`` is the last stored
    layer, ``first_layer`` the first, ``concat_last4`` joins the last four
    stored layers feature-wise (earliest of the four first) and
    ``first_token_final`` keeps only row 0 of the last stored layer.
    """
    if view not in VIEWS:
        raise ValueError(f"unknown view {view!r}, expected one of {VIEWS}")
    header, blocks = read_raw_features(path)
    layers = header["layers"]
    if view == "concat_last4" and layers < 4:
        raise FeatureFileError(f"view concat_last4 needs >= 4 stored layers, file has {layers}")
    out: dict[str, FeatureSequence] = {}
    for rec_id, block in blocks.items():
        if view == "final_layer":
            mat = block[-1]
        elif view == "first_layer":
            mat = block[0]
        elif view == "concat_last4":
            t_len = block.shape[1]
            mat = block[-4:].transpose(1, 0, 2).reshape(t_len, 4 * header["dim"])
        else:  # first_token_final
            mat = block[-1][0:1]
        mat = np.ascontiguousarray(mat)
        out[rec_id] = FeatureSequence(matrix=mat, mask=_full_mask(mat.shape[0]))
    return out


# ---------------------------------------------------------------------------
# static word embeddings


@dataclass(frozen=True)
class EmbeddingTable:
    """Word → vector map; lookups are total, unknown words give zeros."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def lookup(self, word: str) -> np.ndarray:
        vec = self.vectors.get(word)
        if vec is None:
            return np.zeros(self.dim, dtype=np.float32)
        return vec


def load_embedding_table(path, expected_dim: int | None = None) -> EmbeddingTable:
    """Parse the ``word v1 ... vd`` text format (optional ``count dim`` first line)."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = expected_dim
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if not line.strip():
                continue
            if line_no == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # vocab-size/dim header line
                except ValueError:
                    pass
            word, values = parts[0], parts[1:]
            if not values:
                raise EmbeddingFormatError(f"line {line_no}: no vector components")
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise EmbeddingFormatError(
                    f"line {line_no}: expected {dim} components, found {len(values)}")
            try:
                vec = np.array([float(v) for v in values], dtype=np.float32)
            except ValueError as exc:
                raise EmbeddingFormatError(f"line {line_no}: {exc}") from None
            vectors[word] = vec
    if dim is None:
        raise EmbeddingFormatError("embedding file holds no vectors")
    return EmbeddingTable(dim=dim, vectors=vectors)


def embed_sequence(tokens: list[str], table: EmbeddingTable) -> FeatureSequence:
    """Stack per-token embedding lookups into a T×dim sequence."""
    if not tokens:
        raise ValueError("cannot embed an empty token list")
    matrix = np.stack([table.lookup(tok) for tok in tokens]).astype(np.float32)
    return FeatureSequence(matrix=matrix, mask=_full_mask(len(tokens)))


def coverage_report(corpus_tokens: list[list[str]], table: EmbeddingTable) -> dict[str, float]:
    """Unique-word and full-text coverage of a tokenized corpus, in percent."""
    vocab: set[str] = set()
    total = 0
    covered = 0
    for tokens in corpus_tokens:
        for tok in tokens:
            vocab.add(tok)
            total += 1
            if tok in table:
                covered += 1
    if total == 0:
        raise ValueError("coverage_report needs a nonempty corpus")
    in_table = sum(1 for w in vocab if w in table)
    return {
        "unique_word_coverage": 100.0 * in_table / len(vocab),
        "full_text_coverage": 100.0 * covered / total,
    }
