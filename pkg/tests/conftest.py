"""Shared fixtures: synthetic corpora with matching FRZF feature files."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from frozenclf.feature_io import write_features
from frozenclf.textprep import RawTweet, write_corpus_tsv
from frozenclf.trainer import Example


def make_cluster_examples(rng, n, d=8, t_len=4, sep=1.0, noise=0.6, prefix="ex"):
    """Two Gaussian clusters in R^d rendered as T-step sequences."""
    out = []
    direction = np.ones(d) / np.sqrt(d)
    for i in range(n):
        label = int(rng.integers(0, 2))
        center = (2 * label - 1) * sep * direction
        rows = center + rng.normal(scale=noise, size=(t_len, d))
        out.append(Example(id=f"{prefix}{i}", features=rows.astype(np.float32),
                           mask=np.ones(t_len, dtype=bool), label=label))
    return out


def write_language_fixture(root: Path, name: str, seed: int, sizes=(60, 20, 40),
                           d=8, t_len=4, sep=1.0, noise=0.6):
    """Write train/val/test TSVs plus one FRZF file covering all splits."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    paths = {}
    records = []
    for split, n in zip(("train", "val", "test"), sizes):
        examples = make_cluster_examples(rng, n, d, t_len, sep, noise, prefix=f"{name}-{split}-")
        tweets = [RawTweet(id=ex.id, text=f"sample text {ex.id}", label=ex.label, language=name)
                  for ex in examples]
        tsv = root / f"{name}_{split}.tsv"
        write_corpus_tsv(tsv, tweets)
        paths[f"{split}_tsv"] = str(tsv)
        records.extend((ex.id, ex.features[None, :, :]) for ex in examples)
    frzf = root / f"{name}.frzf"
    write_features(frzf, dim=d, layers=1, records=records, extractor=f"synthetic-{name}")
    paths["features"] = {"kind": "frzf", "path": str(frzf), "view": "final_layer"}
    return paths


@pytest.fixture
def bilingual_fixture(tmp_path):
    src = write_language_fixture(tmp_path, "src", seed=101, sizes=(60, 20, 40))
    tgt = write_language_fixture(tmp_path, "tgt", seed=202, sizes=(60, 20, 40))
    return {"root": tmp_path, "source": src, "target": tgt}
