"""Experiment protocols and reproducible run records.

Protocols wire corpora + features into train/eval runs:

* ``unilingual``   - train, validate and test on one language
* ``zero_shot``    - train/validate on the source language, test on the target
* ``few_shot``     - inject pct% of the target training set into the source
                     training set (0% is definitionally zero-shot)
* ``few_shot_only``- train on just the injected sample (control run)

One seed drives everything: head init, batch shuffling, dropout and the
few-shot sample draw. A run record is a JSON document that fully describes
the run and is byte-identical across repeats; wall-clock timing lives in a
separate document so determinism checks can compare records directly.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from .blocks import BlockConfig, build
from .feature_io import embed_sequence, load_embedding_table, load_features
from .textprep import read_corpus_tsv
from .trainer import Example, MetricsReport, TrainConfig, evaluate, few_shot_mix, train

PROTOCOLS = ("unilingual", "zero_shot", "few_shot", "few_shot_only")
FEW_SHOT_GRID = (0, 1, 5, 10, 25, 50, 100)


class ExperimentFileError(ValueError):
    """Schema violation in an experiment JSON document."""


class MissingInputError(ValueError):
    """A referenced corpus/feature input does not exist or does not line up."""


@dataclass(frozen=True)
class FeatureRef:
    kind: str  # frzf | embedding
    path: str
    view: str = "final_layer"


@dataclass(frozen=True)
class CorpusSide:
    train_tsv: str
    val_tsv: str
    test_tsv: str
    features: FeatureRef


@dataclass(frozen=True)
class ExperimentSpec:
    protocol: str
    block: BlockConfig
    train: TrainConfig
    source: CorpusSide
    seed: int
    target: CorpusSide | None = None
    pct: float = 0.0
    output_dir: str | None = None

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ExperimentFileError(f"unknown protocol {self.protocol!r}")
        if self.protocol in ("zero_shot", "few_shot", "few_shot_only") and self.target is None:
            raise ExperimentFileError(f"protocol {self.protocol} needs a target side")
        if self.protocol == "few_shot_only" and self.pct <= 0:
            raise ExperimentFileError("few_shot_only needs pct > 0")


# ---------------------------------------------------------------------------
# experiment JSON schema


def _require_keys(doc: dict, required: set[str], optional: set[str], where: str) -> None:
    missing = required - set(doc)
    if missing:
        raise ExperimentFileError(f"{where}: missing keys {sorted(missing)}")
    unknown = set(doc) - required - optional
    if unknown:
        raise ExperimentFileError(f"{where}: unknown keys {sorted(unknown)}")


def _parse_features(doc: dict) -> FeatureRef:
    _require_keys(doc, {"kind", "path"}, {"view"}, "features")
    if doc["kind"] not in ("frzf", "embedding"):
        raise ExperimentFileError(f"features.kind must be frzf or embedding, got {doc['kind']!r}")
    return FeatureRef(kind=doc["kind"], path=doc["path"], view=doc.get("view", "final_layer"))


def _parse_side(doc: dict, where: str) -> CorpusSide:
    _require_keys(doc, {"train_tsv", "val_tsv", "test_tsv", "features"}, set(), where)
    return CorpusSide(
        train_tsv=doc["train_tsv"],
        val_tsv=doc["val_tsv"],
        test_tsv=doc["test_tsv"],
        features=_parse_features(doc["features"]),
    )


def _parse_train(doc: dict, seed: int) -> TrainConfig:
    allowed = {"preset", "learning_rate", "batch_size", "max_epochs", "patience", "max_len"}
    _require_keys(doc, set(), allowed, "train")
    overrides = {k: doc[k] for k in ("max_epochs", "patience", "max_len") if k in doc}
    if doc.get("preset") is not None:
        extra = {k: doc[k] for k in ("learning_rate", "batch_size") if k in doc}
        return TrainConfig.from_preset(doc["preset"], seed=seed, **overrides, **extra)
    if "learning_rate" not in doc or "batch_size" not in doc:
        raise ExperimentFileError("train needs a preset or explicit learning_rate + batch_size")
    return TrainConfig(learning_rate=doc["learning_rate"], batch_size=doc["batch_size"],
                       seed=seed, **overrides)


def parse_spec(doc: dict) -> ExperimentSpec:
    _require_keys(doc, {"protocol", "seed", "block", "train", "source"},
                  {"target", "pct", "output_dir"}, "experiment")
    seed = doc["seed"]
    train_cfg = _parse_train(dict(doc["train"]), seed)
    block_doc = dict(doc["block"])
    # preset RNN columns flow into LSTM heads unless explicitly configured
    if block_doc.get("variant") == "lstm_head":
        if "hidden" not in block_doc and train_cfg.rnn_hidden is not None:
            block_doc["hidden"] = train_cfg.rnn_hidden
        if "dropout" not in block_doc and train_cfg.rnn_dropout is not None:
            block_doc["dropout"] = train_cfg.rnn_dropout
    try:
        block = BlockConfig.from_dict(block_doc)
    except ValueError as exc:
        raise ExperimentFileError(f"block: {exc}") from None
    return ExperimentSpec(
        protocol=doc["protocol"],
        block=block,
        train=train_cfg,
        source=_parse_side(dict(doc["source"]), "source"),
        target=_parse_side(dict(doc["target"]), "target") if "target" in doc else None,
        seed=seed,
        pct=float(doc.get("pct", 0.0)),
        output_dir=doc.get("output_dir"),
    )


def load_spec(path) -> ExperimentSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingInputError(f"experiment file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ExperimentFileError(f"experiment file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ExperimentFileError("experiment file must hold a JSON object")
    return parse_spec(doc)


def spec_to_dict(spec: ExperimentSpec) -> dict:
    def side(s: CorpusSide | None):
        if s is None:
            return None
        return {"train_tsv": s.train_tsv, "val_tsv": s.val_tsv, "test_tsv": s.test_tsv,
                "features": {"kind": s.features.kind, "path": s.features.path, "view": s.features.view}}

    return {
        "protocol": spec.protocol,
        "seed": spec.seed,
        "pct": spec.pct,
        "block": spec.block.to_dict(),
        "train": {
            "preset": spec.train.preset,
            "learning_rate": spec.train.learning_rate,
            "batch_size": spec.train.batch_size,
            "max_epochs": spec.train.max_epochs,
            "patience": spec.train.patience,
            "max_len": spec.train.max_len,
        },
        "source": side(spec.source),
        "target": side(spec.target),
    }


# ---------------------------------------------------------------------------
# dataset assembly


def _load_examples(tsv_path: str, features: FeatureRef) -> list[Example]:
    try:
        tweets = read_corpus_tsv(tsv_path)
    except FileNotFoundError:
        raise MissingInputError(f"corpus file not found: {tsv_path}") from None
    if features.kind == "frzf":
        try:
            feats = load_features(features.path, view=features.view)
        except FileNotFoundError:
            raise MissingInputError(f"feature file not found: {features.path}") from None
        examples = []
        for tw in tweets:
            seq = feats.get(tw.id)
            if seq is None:
                raise MissingInputError(f"no features for id {tw.id!r} in {features.path}")
            examples.append(Example(id=tw.id, features=seq.matrix, mask=seq.mask, label=tw.label))
        return examples
    try:
        table = load_embedding_table(features.path)
    except FileNotFoundError:
        raise MissingInputError(f"embedding file not found: {features.path}") from None
    examples = []
    for tw in tweets:
        tokens = tw.text.split() or ["</empty>"]
        seq = embed_sequence(tokens, table)
        examples.append(Example(id=tw.id, features=seq.matrix, mask=seq.mask, label=tw.label))
    return examples


def load_side(side: CorpusSide) -> tuple[list[Example], list[Example], list[Example]]:
    return (_load_examples(side.train_tsv, side.features),
            _load_examples(side.val_tsv, side.features),
            _load_examples(side.test_tsv, side.features))


# ---------------------------------------------------------------------------
# run


def run_experiment(spec: ExperimentSpec) -> tuple[MetricsReport, dict]:
    """Execute one protocol run; returns the report and a deterministic
    run-record dict (timing is reported separately on the record's twin,
    see ``timing_document``)."""
    started = time.perf_counter()
    src_train, src_val, src_test = load_side(spec.source)
    injected_count = 0
    if spec.protocol == "unilingual":
        train_set, val_set, test_set = src_train, src_val, src_test
    else:
        tgt_train, _tgt_val, tgt_test = load_side(spec.target)
        mixed, injected = few_shot_mix(src_train, tgt_train, spec.pct, seed=spec.seed)
        injected_count = len(injected)
        if spec.protocol == "zero_shot":
            train_set = src_train
        elif spec.protocol == "few_shot":
            train_set = mixed
        else:  # few_shot_only
            if not injected:
                raise MissingInputError("few_shot_only drew zero samples; raise pct")
            train_set = injected
        val_set = src_val
        test_set = tgt_test

    head = build(spec.block, init_seed=spec.seed)
    head, history = train(head, train_set, val_set, spec.train)
    report = evaluate(head, test_set, spec.train.max_len)
    report.history = history
    report.wall_time_s = time.perf_counter() - started

    record = {
        "spec": spec_to_dict(spec),
        "seed": spec.seed,
        "preset": spec.train.preset,
        "protocol": spec.protocol,
        "pct": spec.pct,
        "injected_count": injected_count,
        "train_size": len(train_set),
        "param_count": head.param_count,
        "metrics": report.to_dict(include_timing=False),
    }
    return report, record


def timing_document(report: MetricsReport) -> dict:
    return {"wall_time_s": report.wall_time_s}


def record_json(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True)
