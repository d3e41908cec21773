"""CLI: frzf-extract extract|verify."""

from __future__ import annotations

import argparse
import logging
import sys

from .extract import ExtractionJob, run_extraction, verify
from .frzf import FrzfError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frzf-extract",
                                     description="export frozen transformer features to FRZF")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run a frozen checkpoint over a corpus TSV")
    p.add_argument("--model", required=True, help="checkpoint id or local path")
    p.add_argument("--layers", choices=("last", "first", "last4"), default="last")
    p.add_argument("--in", dest="infile", required=True, help="cleaned corpus TSV")
    p.add_argument("--out", required=True, help="output FRZF path")
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--batch", type=int, default=32)
    p.set_defaults(cmd="extract")

    p = sub.add_parser("verify", help="re-extract sample ids and compare to the stored file")
    p.add_argument("--frzf", required=True)
    p.add_argument("--in", dest="infile", required=True, help="the corpus the file was built from")
    p.add_argument("--sample", required=True, help="comma-separated ids (empty string checks nothing)")
    p.add_argument("--model", help="override the model stamped in the header")
    p.add_argument("--layers", choices=("last", "first", "last4"))
    p.add_argument("--max-len", type=int)
    p.add_argument("--tol", type=float, default=1e-5)
    p.set_defaults(cmd="verify")

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "extract":
            job = ExtractionJob(model=args.model, input_tsv=args.infile, output=args.out,
                                layers=args.layers, max_len=args.max_len, batch_size=args.batch)
            header = run_extraction(job)
            print(f"wrote {args.out}: dim {header['dim']}, layers {header['layers']}, "
                  f"{header['records']} records")
            return 0
        sample = [s for s in args.sample.split(",") if s]
        report = verify(args.frzf, sample, args.infile, model=args.model,
                        layers=args.layers, max_len=args.max_len, tol=args.tol)
        status = "OK" if report["ok"] else "MISMATCH"
        print(f"{status}: checked {report['checked']} records, "
              f"max abs diff {report['max_abs_diff']:.2e}")
        return 0 if report["ok"] else 1
    except (FrzfError, ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
