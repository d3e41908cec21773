#!/usr/bin/env python3
"""tf-idf + linear SVM baseline over cleaned corpus TSVs.

Usage:
    python scripts/run_svm_baseline.py --train cleaned_train.tsv \
        --test cleaned_test.tsv [--c 3.5938]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from frozenclf.baselines import DEFAULT_C, TfidfVectorizer, svm_predict, svm_train
from frozenclf.textprep import read_corpus_tsv
from frozenclf.trainer import metrics_from_predictions


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train", required=True, help="cleaned training TSV")
    parser.add_argument("--test", required=True, help="cleaned test TSV")
    parser.add_argument("--c", type=float, default=DEFAULT_C)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    train_tweets = read_corpus_tsv(args.train)
    test_tweets = read_corpus_tsv(args.test)
    vectorizer = TfidfVectorizer()
    train_vecs = vectorizer.fit_transform([tw.text.split() for tw in train_tweets])
    test_vecs = vectorizer.transform([tw.text.split() for tw in test_tweets])

    model, history = svm_train(train_vecs, [tw.label for tw in train_tweets],
                               c=args.c, dim=vectorizer.size, seed=args.seed)
    report = metrics_from_predictions([tw.label for tw in test_tweets],
                                      svm_predict(model, test_vecs))
    print(f"vocab {vectorizer.size}, C {args.c}, {len(history)} descent epochs")
    print(f"acc {report.accuracy:.2f}  prec {report.precision:.2f}  "
          f"rec {report.recall:.2f}  f1 {report.f1:.2f}  macro {report.macro_f1:.2f}")


if __name__ == "__main__":
    main()
