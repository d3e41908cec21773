#!/usr/bin/env python3
"""Build a synthetic bilingual dataset for end-to-end CLI runs.

Writes, per language, train/val/test corpus TSVs and one FRZF feature file
whose "representations" are two Gaussian clusters (so every head can learn
the task), plus a ready-to-run few-shot experiment JSON.

Usage:
    python scripts/make_synthetic_fixtures.py --out fixtures --seed 0
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from frozenclf.feature_io import write_features
from frozenclf.textprep import RawTweet, write_corpus_tsv

FILLER = ["some", "words", "about", "nothing", "much", "maga", "bitch", "wall",
          "sunny", "day", "rain", "coffee", "news", "vote", "game"]


def build_language(root: Path, name: str, seed: int, sizes, d, t_len, sep, noise):
    rng = np.random.default_rng(seed)
    direction = np.ones(d) / np.sqrt(d)
    records = []
    side = {}
    for split, n in zip(("train", "val", "test"), sizes):
        tweets = []
        for i in range(n):
            ex_id = f"{name}-{split}-{i}"
            label = int(rng.integers(0, 2))
            center = (2 * label - 1) * sep * direction
            rows = (center + rng.normal(scale=noise, size=(t_len, d))).astype(np.float32)
            records.append((ex_id, rows[None, :, :]))
            text = " ".join(rng.choice(FILLER, size=6))
            tweets.append(RawTweet(id=ex_id, text=text, label=label, language=name))
        tsv = root / f"{name}_{split}.tsv"
        write_corpus_tsv(tsv, tweets)
        side[f"{split}_tsv"] = str(tsv)
    frzf = root / f"{name}.frzf"
    write_features(frzf, dim=d, layers=1, records=records, extractor=f"synthetic|{name}|seed={seed}")
    side["features"] = {"kind": "frzf", "path": str(frzf), "view": "final_layer"}
    return side


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--seq-len", type=int, default=6)
    parser.add_argument("--sizes", default="200,50,100", help="train,val,test sizes per language")
    args = parser.parse_args()

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    sizes = tuple(int(x) for x in args.sizes.split(","))
    src = build_language(root, "src", args.seed, sizes, args.dim, args.seq_len, sep=1.2, noise=0.5)
    tgt = build_language(root, "tgt", args.seed + 1, sizes, args.dim, args.seq_len, sep=1.2, noise=0.5)

    experiment = {
        "protocol": "few_shot",
        "pct": 10,
        "seed": args.seed,
        "block": {"variant": "axel", "d": args.dim},
        "train": {"learning_rate": 0.0005, "batch_size": 16, "max_epochs": 60, "patience": 8},
        "source": src,
        "target": tgt,
        "output_dir": str(root / "runs"),
    }
    (root / "experiment.json").write_text(json.dumps(experiment, indent=2) + "\n", encoding="utf-8")
    print(f"fixtures in {root}/ (try: frozenclf run --experiment {root}/experiment.json)")


if __name__ == "__main__":
    main()
