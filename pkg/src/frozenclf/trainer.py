"""Training loop (cross-entropy + Adam + early stopping), metrics and
few-shot sample accounting.

Reported metrics are percentages. "F1" defaults to the positive
(hateful) class; macro-F1 is always computed alongside it, since the two
diverge on imbalanced data and both are useful.

Early stopping monitors positive-class validation F1: after each epoch the
best-so-far parameter snapshot is kept, and training stops once the count
of consecutive non-improving epochs reaches the patience (so patience 0
trains exactly one epoch). The best snapshot is always restored.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import tensor as tc
from .blocks import Head
from .tensor import AdamState, ShapeError


@dataclass(frozen=True)
class Preset:
    learning_rate: float
    batch_size: int
    rnn_hidden: int | None
    rnn_dropout: float | None


# hyperparameter letters -> (learning rate, batch size, RNN feature size, RNN dropout)
PRESETS: dict[str, Preset] = {
    "A": Preset(0.001, 32, 128, 0.0),
    "B": Preset(0.001, 32, 128, 0.2),
    "C": Preset(0.0005, 16, 128, 0.2),
    "D": Preset(0.00005, 64, 128, 0.0),
    "E": Preset(0.00005, 64, None, None),
    "F": Preset(0.0005, 64, None, None),
    "G": Preset(0.00001, 64, None, None),
    "H": Preset(0.0005, 32, 64, 0.2),
    "I": Preset(0.0005, 32, 128, 0.2),
    "J": Preset(0.0005, 64, 128, 0.2),
    "K": Preset(0.00005, 32, None, None),
    "L": Preset(0.00005, 32, 128, 0.0),
}


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    batch_size: int
    rnn_hidden: int | None = None
    rnn_dropout: float | None = None
    max_epochs: int = 100
    patience: int = 5
    seed: int = 0
    max_len: int = 64
    preset: str | None = None

    @classmethod
    def from_preset(cls, letter: str, **overrides) -> "TrainConfig":
        if letter not in PRESETS:
            raise ValueError(f"unknown preset {letter!r}; table defines {sorted(PRESETS)} "
                             "(others must be given explicitly)")
        p = PRESETS[letter]
        cfg = cls(learning_rate=p.learning_rate, batch_size=p.batch_size,
                  rnn_hidden=p.rnn_hidden, rnn_dropout=p.rnn_dropout, preset=letter)
        return replace(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# examples and batching


@dataclass(frozen=True)
class Example:
    id: str
    features: np.ndarray  # [T, d] float32
    mask: np.ndarray  # [T] bool
    label: int


def clip_to_max_len(example: Example, max_len: int) -> tuple[np.ndarray, np.ndarray]:
    return example.features[:max_len], example.mask[:max_len]


def pad_batch(examples: list[Example], max_len: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Truncate to the cap, then pad every sequence to the batch max length."""
    clipped = [clip_to_max_len(ex, max_len) for ex in examples]
    longest = max(f.shape[0] for f, _ in clipped)
    out = []
    for feats, mask in clipped:
        short = longest - feats.shape[0]
        if short:
            feats = np.vstack([feats, np.zeros((short, feats.shape[1]), dtype=feats.dtype)])
            mask = np.concatenate([mask, np.zeros(short, dtype=bool)])
        out.append((feats, mask))
    return out


# ---------------------------------------------------------------------------
# metrics


@dataclass
class MetricsReport:
    accuracy: float
    precision: float  # positive class
    recall: float  # positive class
    f1: float  # positive class
    f1_per_class: tuple[float, float]
    macro_f1: float
    confusion: list[list[int]]  # [true][pred]
    history: list[dict] = field(default_factory=list)
    wall_time_s: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        doc = {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "f1_per_class": list(self.f1_per_class),
            "macro_f1": self.macro_f1,
            "confusion": self.confusion,
            "history": self.history,
        }
        if include_timing:
            doc["wall_time_s"] = self.wall_time_s
        return doc


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def metrics_from_predictions(labels: list[int], predictions: list[int]) -> MetricsReport:
    if not labels or len(labels) != len(predictions):
        raise ValueError("labels and predictions must be equal-length and nonempty")
    confusion = [[0, 0], [0, 0]]
    for truth, pred in zip(labels, predictions):
        confusion[truth][pred] += 1
    tn, fp = confusion[0]
    fn, tp = confusion[1]
    precision, recall, f1_pos = _prf(tp, fp, fn)
    _, _, f1_neg = _prf(tn, fn, fp)
    return MetricsReport(
        accuracy=100.0 * (tp + tn) / len(labels),
        precision=precision,
        recall=recall,
        f1=f1_pos,
        f1_per_class=(f1_neg, f1_pos),
        macro_f1=(f1_neg + f1_pos) / 2.0,
        confusion=confusion,
    )


# ---------------------------------------------------------------------------
# train / evaluate


def _check_dims(head: Head, dataset: list[Example], name: str) -> None:
    if not dataset:
        raise ValueError(f"{name} set is empty")
    for ex in dataset:
        if ex.features.shape[1] != head.config.d:
            raise ShapeError(
                f"{name} example {ex.id!r} has dim {ex.features.shape[1]}, head wants {head.config.d}")


def predict(head: Head, dataset: list[Example], max_len: int = 64) -> list[int]:
    prepared = pad_batch(dataset, max_len)
    preds = []
    for feats, mask in prepared:
        logits = head.forward(feats, mask, training=False)
        preds.append(int(np.argmax(logits.data)))
    return preds


def evaluate(head: Head, test_set: list[Example], max_len: int = 64) -> MetricsReport:
    _check_dims(head, test_set, "test")
    predictions = predict(head, test_set, max_len)
    return metrics_from_predictions([ex.label for ex in test_set], predictions)


def train(head: Head, train_set: list[Example], val_set: list[Example],
          config: TrainConfig) -> tuple[Head, list[dict]]:
    """Seeded mini-batch training with val-F1 early stopping; returns the
    head restored to its best validation snapshot plus the epoch history."""
    _check_dims(head, train_set, "train")
    _check_dims(head, val_set, "val")
    rng = np.random.default_rng(config.seed)
    params = head.parameters()
    opt = AdamState(lr=config.learning_rate)
    best_f1 = -1.0
    best_state = head.get_state()
    stale_epochs = 0
    history: list[dict] = []

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_set))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start:start + config.batch_size]]
            prepared = pad_batch(batch, config.max_len)
            logits = [head.forward(f, m, training=True, rng=rng) for f, m in prepared]
            stacked = tc.concat([tc.reshape(lg, (1, 2)) for lg in logits], axis=0)
            loss = tc.cross_entropy(stacked, [ex.label for ex in batch])
            tc.backward(loss)
            tc.adam_step(opt, params)
            epoch_loss += float(loss.data) * len(batch)
        val_report = evaluate(head, val_set, config.max_len)
        improved = val_report.f1 > best_f1
        if improved:
            best_f1 = val_report.f1
            best_state = head.get_state()
            stale_epochs = 0
        else:
            if val_report.f1 == best_f1:
                # a tie is still the best observed; prefer the longer-trained
                # weights while the staleness counter keeps running
                best_state = head.get_state()
            stale_epochs += 1
        history.append({
            "epoch": epoch,
            "train_loss": epoch_loss / len(train_set),
            "val_f1": val_report.f1,
            "val_macro_f1": val_report.macro_f1,
            "improved": improved,
        })
        if stale_epochs >= config.patience:
            break
    head.set_state(best_state)
    return head, history


def train_timed(head: Head, train_set, val_set, config) -> tuple[Head, list[dict], float]:
    started = time.perf_counter()
    head, history = train(head, train_set, val_set, config)
    return head, history, time.perf_counter() - started


# ---------------------------------------------------------------------------
# few-shot sample injection


def few_shot_mix(source_train: list[Example], target_train: list[Example],
                 pct: float, seed: int = 0) -> tuple[list[Example], list[Example]]:
    """Source set plus a seeded floor(pct% of target) sample.

    Returns (mixed, injected); the injected list alone backs the
    few-shot-only control runs.
    """
    if not 0 <= pct <= 100:
        raise ValueError(f"pct must lie in [0, 100], got {pct}")
    ordered = sorted(target_train, key=lambda ex: ex.id)
    k = int(np.floor(pct / 100.0 * len(ordered)))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(ordered), size=k, replace=False) if k else np.array([], dtype=int)
    injected = [ordered[i] for i in sorted(chosen)]
    return list(source_train) + injected, injected
