"""Run a frozen pretrained transformer over a corpus and export hidden states.

The checkpoint's own subword tokenizer is applied to the (already cleaned)
corpus text; forward passes run in inference mode with weights untouched.
Feature dim and layer count come from the model config, never hardcoded.
The layer selection is stamped into the FRZF extractor-name field
(``<model>|layers=<sel>|max_len=<n>``) so verification can recover it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .frzf import FrzfError, read_frzf, write_frzf

logger = logging.getLogger(__name__)

LAYER_SELECTIONS = ("last", "first", "last4")


@dataclass(frozen=True)
class ExtractionJob:
    model: str
    input_tsv: str
    output: str
    layers: str = "last"
    max_len: int = 64
    batch_size: int = 32

    def __post_init__(self):
        if self.layers not in LAYER_SELECTIONS:
            raise ValueError(f"layers must be one of {LAYER_SELECTIONS}, got {self.layers!r}")
        if self.max_len < 1 or self.batch_size < 1:
            raise ValueError("max_len and batch_size must be positive")


def read_corpus(tsv_path) -> list[tuple[str, str]]:
    """(id, text) pairs from the shared 4-column corpus TSV."""
    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(tsv_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if line_no == 1 and cols[0].strip().lower() == "id":
                continue
            if len(cols) != 4:
                raise ValueError(f"{tsv_path}: line {line_no}: expected 4 columns, got {len(cols)}")
            if cols[0] in seen:
                raise ValueError(f"{tsv_path}: line {line_no}: duplicate id {cols[0]!r}")
            seen.add(cols[0])
            rows.append((cols[0], cols[1]))
    return rows


def _load_model(model_id: str):
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    model = AutoModel.from_pretrained(model_id)
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return tokenizer, model


def _layer_indices(selection: str, n_layers: int) -> list[int]:
    # indices over transformer layer outputs (embedding output excluded)
    if selection == "last":
        return [n_layers - 1]
    if selection == "first":
        return [0]
    if n_layers < 4:
        raise ValueError(f"last4 needs >= 4 layers, checkpoint has {n_layers}")
    return list(range(n_layers - 4, n_layers))


def _encode_batch(tokenizer, texts: list[str], max_len: int):
    enc = tokenizer(texts, truncation=True, max_length=max_len)
    for i, ids in enumerate(enc["input_ids"]):
        if not ids:
            logger.warning("text %d tokenized to nothing; emitting a single pad token", i)
            enc["input_ids"][i] = [tokenizer.pad_token_id]
            enc["attention_mask"][i] = [1]
    return tokenizer.pad(enc, return_tensors="pt")


def _extract_blocks(tokenizer, model, rows: list[tuple[str, str]],
                    selection: str, max_len: int, batch_size: int):
    """Yield (id, [L, T, d] float32) blocks; weights are never updated."""
    n_layers = model.config.num_hidden_layers
    indices = _layer_indices(selection, n_layers)
    for start in range(0, len(rows), batch_size):
        chunk = rows[start:start + batch_size]
        batch = _encode_batch(tokenizer, [text for _, text in chunk], max_len)
        with torch.inference_mode():
            assert not torch.is_grad_enabled()
            out = model(**batch, output_hidden_states=True)
        # hidden_states[0] is the embedding output; transformer layers follow
        stacked = [out.hidden_states[1 + li] for li in indices]
        lengths = batch["attention_mask"].sum(dim=1)
        for i, (rec_id, _) in enumerate(chunk):
            t_len = int(lengths[i])
            block = np.stack([layer[i, :t_len].numpy() for layer in stacked]).astype("<f4")
            yield rec_id, block


def run_extraction(job: ExtractionJob) -> dict:
    """Extract features for every corpus row and write the FRZF file."""
    rows = read_corpus(job.input_tsv)
    tokenizer, model = _load_model(job.model)
    dim = model.config.hidden_size
    indices = _layer_indices(job.layers, model.config.num_hidden_layers)
    stamp = f"{job.model}|layers={job.layers}|max_len={job.max_len}"
    write_frzf(job.output, dim=dim, layers=len(indices),
               records=_extract_blocks(tokenizer, model, rows, job.layers,
                                       job.max_len, job.batch_size),
               extractor=stamp)
    header = {"dim": dim, "layers": len(indices), "records": len(rows), "extractor": stamp}
    logger.info("wrote %s: %s", job.output, header)
    return header


def parse_stamp(extractor: str) -> dict:
    """Recover model/layers/max_len from the header's extractor field."""
    parts = extractor.split("|")
    info = {"model": parts[0]}
    for part in parts[1:]:
        if "=" in part:
            key, value = part.split("=", 1)
            info[key] = value
    return info


def verify(frzf_path, sample_ids: list[str], input_tsv, model: str | None = None,
           layers: str | None = None, max_len: int | None = None,
           tol: float = 1e-5, batch_size: int = 32) -> dict:
    """Re-extract a sample of ids and compare against the stored payloads."""
    header, blocks = read_frzf(frzf_path)
    stamp = parse_stamp(header["extractor"])
    model = model or stamp.get("model")
    layers = layers or stamp.get("layers", "last")
    max_len = max_len or int(stamp.get("max_len", 64))
    if not sample_ids:
        logger.warning("empty sample list: nothing to verify")
        return {"ok": True, "checked": 0, "max_abs_diff": 0.0}
    missing = [s for s in sample_ids if s not in blocks]
    if missing:
        raise FrzfError(f"ids missing from {frzf_path}: {missing}")
    corpus = {rec_id: text for rec_id, text in read_corpus(input_tsv)}
    absent = [s for s in sample_ids if s not in corpus]
    if absent:
        raise FrzfError(f"ids missing from corpus: {absent}")
    tokenizer, torch_model = _load_model(model)
    rows = [(s, corpus[s]) for s in sample_ids]
    max_diff = 0.0
    for rec_id, fresh in _extract_blocks(tokenizer, torch_model, rows, layers, max_len, batch_size):
        stored = blocks[rec_id]
        if stored.shape != fresh.shape:
            return {"ok": False, "checked": len(sample_ids), "max_abs_diff": float("inf"),
                    "mismatch": f"{rec_id}: shape {stored.shape} vs {fresh.shape}"}
        max_diff = max(max_diff, float(np.abs(stored - fresh).max()))
    return {"ok": max_diff <= tol, "checked": len(sample_ids), "max_abs_diff": max_diff}
