#!/usr/bin/env python3
"""Train every head variant on one dataset and print a comparison table.

Works against the synthetic fixtures (see make_synthetic_fixtures.py) or
any corpus TSVs + FRZF file laid out the same way.

Usage:
    python scripts/make_synthetic_fixtures.py --out fixtures
    python scripts/run_head_zoo.py --fixtures fixtures --lang src --seed 0
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from frozenclf.blocks import all_variant_configs, build
from frozenclf.experiment import CorpusSide, FeatureRef, load_side
from frozenclf.trainer import TrainConfig, evaluate, train


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixtures", default="fixtures")
    parser.add_argument("--lang", default="src")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lr", type=float, default=0.0005)
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--epochs", type=int, default=40)
    parser.add_argument("--patience", type=int, default=6)
    parser.add_argument("--hidden", type=int, default=16)
    args = parser.parse_args()

    root = Path(args.fixtures)
    side = CorpusSide(
        train_tsv=str(root / f"{args.lang}_train.tsv"),
        val_tsv=str(root / f"{args.lang}_val.tsv"),
        test_tsv=str(root / f"{args.lang}_test.tsv"),
        features=FeatureRef(kind="frzf", path=str(root / f"{args.lang}.frzf")),
    )
    train_set, val_set, test_set = load_side(side)
    d = train_set[0].features.shape[1]
    cfg = TrainConfig(learning_rate=args.lr, batch_size=args.batch,
                      max_epochs=args.epochs, patience=args.patience, seed=args.seed)

    header = f"{'head':<28} {'params':>9} {'epochs':>7} {'test F1':>8} {'macro':>7} {'sec':>6}"
    print(header)
    print("-" * len(header))
    for config in all_variant_configs(d=d, hidden=args.hidden, reduction=4):
        name = config.ablation or config.variant
        if config.variant == "lstm_head":
            name = f"lstm_head_{config.lstm_layers}"
        started = time.perf_counter()
        head = build(config, init_seed=args.seed)
        head, history = train(head, train_set, val_set, cfg)
        report = evaluate(head, test_set, cfg.max_len)
        elapsed = time.perf_counter() - started
        print(f"{name:<28} {head.param_count:>9} {len(history):>7} "
              f"{report.f1:>8.2f} {report.macro_f1:>7.2f} {elapsed:>6.1f}")


if __name__ == "__main__":
    main()
