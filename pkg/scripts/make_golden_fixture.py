#!/usr/bin/env python3
"""Regenerate the golden FRZF fixture referenced by docs/formats.md.

The payload is a fixed arithmetic pattern (value = layer*100 + t*10 + j,
exactly representable in float32) so any byte-level drift in the writer is
caught by tests/test_golden_fixture.py.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from frozenclf.feature_io import write_features


def golden_records():
    records = []
    for rec_id, t_len in (("golden-0", 2), ("golden-1", 3)):
        block = np.zeros((2, t_len, 3), dtype=np.float32)
        for layer in range(2):
            for t in range(t_len):
                for j in range(3):
                    block[layer, t, j] = layer * 100 + t * 10 + j
        records.append((rec_id, block))
    return records


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "docs" / "fixtures" / "golden.frzf"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_features(out, dim=3, layers=2, records=golden_records(), extractor="golden-fixture")
    print(f"wrote {out} ({out.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
