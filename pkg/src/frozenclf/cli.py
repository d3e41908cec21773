"""Command-line front door: clean / audit / resplit / run / sweep / coverage.

Every command is re-runnable: identical inputs and flags produce
byte-identical JSON artifacts. Wall-clock timing is written to a separate
``timing.json`` so determinism checks can compare the main artifacts
directly. Exit codes: 0 success, 1 usage or schema error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment import (
    FEW_SHOT_GRID,
    ExperimentFileError,
    MissingInputError,
    load_spec,
    parse_spec,
    record_json,
    run_experiment,
    spec_to_dict,
    timing_document,
)
from .feature_io import EmbeddingFormatError, FeatureFileError, coverage_report, load_embedding_table
from .partition import (
    KeyPhraseSet,
    SplitBundle,
    categorize,
    false_positive_breakdown,
    hate_ratio_table,
    load_phrases,
    stratified_resplit,
)
from .textprep import (
    CorpusFormatError,
    RawTweet,
    clean,
    corpus_stats,
    default_rules,
    load_rules,
    read_corpus_tsv,
    write_corpus_tsv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

EMPTY_TOKEN = "</empty>"  # placeholder when cleaning strips a tweet entirely


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# clean


def cmd_clean(args) -> int:
    tweets = read_corpus_tsv(args.infile)
    rules = load_rules(args.rules) if args.rules else default_rules()
    if not tweets:
        print("warning: input corpus is empty", file=sys.stderr)
    cleaned_rows = []
    for tw in tweets:
        ct = clean(tw, rules)
        cleaned_rows.append(RawTweet(id=tw.id, text=ct.text or EMPTY_TOKEN,
                                     label=tw.label, language=tw.language))
    write_corpus_tsv(Path(args.out), cleaned_rows)
    if args.stats:
        stats = corpus_stats({"all": tweets}) if tweets else None
        doc = {}
        if stats:
            for (split, label), group in sorted(stats.groups.items()):
                doc[f"{split}/{label}"] = {
                    "count": group.count,
                    "word_mean": group.word_mean,
                    "word_sd": group.word_sd,
                    "char_mean": group.char_mean,
                    "char_sd": group.char_sd,
                    "allcaps_mean": group.allcaps_mean,
                    "special_char_means": group.special_char_means,
                }
        _write_json(Path(args.stats), doc)
    print(f"cleaned {len(tweets)} tweets -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# audit


def _format_ratio(value: float | None) -> str:
    return "n/a" if value is None else f"{value:5.1f}%"


def cmd_audit(args) -> int:
    tweets = read_corpus_tsv(args.infile)
    examples = {tw.id: (tw.text, tw.label) for tw in tweets}
    bundle = SplitBundle.load(args.splits)
    phrases = load_phrases(args.phrases) if args.phrases else KeyPhraseSet()
    split_ids = {"train": bundle.train, "val": bundle.val, "test": bundle.test}
    for name, ids in split_ids.items():
        for ex_id in ids:
            if ex_id not in examples:
                raise MissingInputError(f"split {name} references unknown id {ex_id!r}")
    ratios = hate_ratio_table(examples, split_ids, phrases)
    doc: dict = {"hate_ratios": ratios}
    header = f"{'key phrase':<28} {'train+val':>10} {'test':>10}"
    lines = [header, "-" * len(header)]
    for phrase, row in ratios.items():
        lines.append(f"{phrase:<28} {_format_ratio(row['train+val']):>10} {_format_ratio(row['test']):>10}")
    if args.predictions:
        preds = {}
        with open(args.predictions, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                cols = line.rstrip("\n").split("\t")
                if len(cols) != 2 or cols[1] not in ("0", "1"):
                    raise CorpusFormatError(f"predictions line {line_no}: expected id<TAB>0|1")
                preds[cols[0]] = int(cols[1])
        fp = false_positive_breakdown(examples, bundle.test, preds, phrases)
        doc["false_positives"] = fp
        lines.append("")
        lines.append(f"false positives in test: {fp['false_positives']} of {fp['test_size']} "
                     f"({fp['false_positives_with_any_phrase']} contain a tracked phrase)")
    text = "\n".join(lines)
    print(text)
    if args.out:
        _write_json(Path(args.out), doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# resplit


def cmd_resplit(args) -> int:
    tweets = read_corpus_tsv(args.infile)
    if not tweets:
        raise CorpusFormatError("cannot resplit an empty corpus")
    ratios = tuple(float(x) for x in args.ratios.split(","))
    if len(ratios) != 3:
        raise ExperimentFileError("--ratios needs exactly three comma-separated numbers")
    phrases = load_phrases(args.phrases) if args.phrases else KeyPhraseSet()
    categorized = [(tw.id, categorize(tw.text, tw.label, phrases)) for tw in tweets]
    bundle = stratified_resplit(categorized, ratios=ratios, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(bundle.to_json() + "\n", encoding="utf-8")
    sizes = {name: len(bundle.split(name)) for name in ("train", "val", "test")}
    print(f"resplit {len(tweets)} tweets -> {sizes} (seed {args.seed})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# run / sweep


def _run_one(spec, out_dir: Path) -> dict:
    report, record = run_experiment(spec)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "record.json").write_text(record_json(record) + "\n", encoding="utf-8")
    _write_json(out_dir / "timing.json", timing_document(report))
    return record


def cmd_run(args) -> int:
    spec = load_spec(args.experiment)
    out_dir = Path(args.output_dir or spec.output_dir or ".")
    record = _run_one(spec, out_dir)
    m = record["metrics"]
    print(f"{spec.protocol} pct={spec.pct:g} seed={spec.seed}: "
          f"acc {m['accuracy']:.2f} prec {m['precision']:.2f} "
          f"rec {m['recall']:.2f} f1 {m['f1']:.2f} macro {m['macro_f1']:.2f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = load_spec(args.experiment)
    if spec.target is None:
        raise ExperimentFileError("sweep needs a cross-lingual spec with a target side")
    pcts = [float(x) for x in args.pcts.split(",")] if args.pcts else list(FEW_SHOT_GRID)
    out_root = Path(args.output_dir or spec.output_dir or ".")
    summary_rows = []
    base = spec_to_dict(spec)
    base.pop("target_none", None)
    for pct in pcts:
        doc = json.loads(json.dumps(base))
        doc["protocol"] = "few_shot_only" if args.only else "few_shot"
        doc["pct"] = pct
        run_spec = parse_spec(doc)
        record = _run_one(run_spec, out_root / f"pct_{pct:g}")
        m = record["metrics"]
        summary_rows.append({
            "pct": pct,
            "injected": record["injected_count"],
            "accuracy": m["accuracy"],
            "precision": m["precision"],
            "recall": m["recall"],
            "f1": m["f1"],
            "macro_f1": m["macro_f1"],
        })
    _write_json(out_root / "summary.json", {"rows": summary_rows})
    header = f"{'pct':>5} {'inj':>6} {'acc':>7} {'prec':>7} {'rec':>7} {'f1':>7} {'macro':>7}"
    lines = [header, "-" * len(header)]
    for row in summary_rows:
        lines.append(f"{row['pct']:>5g} {row['injected']:>6} {row['accuracy']:>7.2f} "
                     f"{row['precision']:>7.2f} {row['recall']:>7.2f} "
                     f"{row['f1']:>7.2f} {row['macro_f1']:>7.2f}")
    table = "\n".join(lines)
    (out_root / "summary.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    return EXIT_OK


# ---------------------------------------------------------------------------
# coverage


def cmd_coverage(args) -> int:
    tweets = read_corpus_tsv(args.infile)
    if not tweets:
        raise CorpusFormatError("coverage needs a nonempty corpus")
    table = load_embedding_table(args.emb)
    tokens = [tw.text.split() for tw in tweets]
    report = coverage_report(tokens, table)
    print(f"unique word coverage: {report['unique_word_coverage']:.2f}%")
    print(f"full text coverage:   {report['full_text_coverage']:.2f}%")
    if args.out:
        _write_json(Path(args.out), report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frozenclf",
                                     description="frozen-feature classification pipelines")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", help="run the tweet-cleaning pipeline over a corpus TSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--rules", help="directory of rule tables (default: bundled)")
    p.add_argument("--out", required=True)
    p.add_argument("--stats", help="also write corpus statistics JSON here")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("audit", help="per-phrase hate-ratio table over existing splits")
    p.add_argument("--in", dest="infile", required=True, help="cleaned corpus TSV")
    p.add_argument("--splits", required=True, help="SplitBundle JSON")
    p.add_argument("--phrases", help="family<TAB>phrase file (default: bundled set)")
    p.add_argument("--predictions", help="optional id<TAB>prediction TSV for FP breakdown")
    p.add_argument("--out", help="write the audit JSON here")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("resplit", help="six-category stratified re-split")
    p.add_argument("--in", dest="infile", required=True, help="cleaned corpus TSV")
    p.add_argument("--ratios", default="0.694,0.077,0.229")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phrases", help="family<TAB>phrase file (default: bundled set)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_resplit)

    p = sub.add_parser("run", help="execute one experiment file")
    p.add_argument("--experiment", required=True)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="few-shot percentage sweep over one experiment file")
    p.add_argument("--experiment", required=True)
    p.add_argument("--pcts", help="comma-separated percentages (default 0,1,5,10,25,50,100)")
    p.add_argument("--only", action="store_true",
                   help="train on the injected samples only (control runs)")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("coverage", help="embedding-table coverage of a cleaned corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--emb", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coverage)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except ExperimentFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusFormatError, FeatureFileError, EmbeddingFormatError, MissingInputError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
