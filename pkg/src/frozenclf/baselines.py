"""Non-neural baselines: tf-idf vectorization and a linear hinge-loss SVM.

The vectorizer mirrors the common smoothed-idf convention,
idf = ln((1+N)/(1+df)) + 1 with raw term counts and L2-normalized rows,
and builds its vocabulary from the training split only.

The SVM minimizes 0.5*||w||^2 + C * sum_i hinge(y_i(w.x_i + b)) by
full-batch subgradient descent with a backtracking step size that only
accepts improving steps, so the objective is nonincreasing by
construction. Descent stops once an accepted step improves the objective
by less than the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_C = 3.5938  # tuned baseline value

SparseVec = dict[int, float]


class TfidfVectorizer:
    def __init__(self):
        self.vocabulary: dict[str, int] = {}
        self.idf: np.ndarray | None = None

    def fit(self, docs: list[list[str]]) -> "TfidfVectorizer":
        if not docs:
            raise ValueError("cannot fit tf-idf on an empty corpus")
        df: dict[str, int] = {}
        for doc in docs:
            for term in set(doc):
                df[term] = df.get(term, 0) + 1
        self.vocabulary = {term: i for i, term in enumerate(sorted(df))}
        n_docs = len(docs)
        idf = np.zeros(len(self.vocabulary), dtype=np.float64)
        for term, i in self.vocabulary.items():
            idf[i] = math.log((1 + n_docs) / (1 + df[term])) + 1.0
        self.idf = idf
        return self

    def transform(self, docs: list[list[str]]) -> list[SparseVec]:
        if self.idf is None:
            raise RuntimeError("fit the vectorizer before transforming")
        out: list[SparseVec] = []
        for doc in docs:
            counts: dict[int, int] = {}
            for term in doc:
                idx = self.vocabulary.get(term)
                if idx is not None:
                    counts[idx] = counts.get(idx, 0) + 1
            vec = {i: c * self.idf[i] for i, c in counts.items()}
            norm = math.sqrt(sum(v * v for v in vec.values()))
            if norm > 0:
                vec = {i: v / norm for i, v in vec.items()}
            out.append(vec)
        return out

    def fit_transform(self, docs: list[list[str]]) -> list[SparseVec]:
        return self.fit(docs).transform(docs)

    @property
    def size(self) -> int:
        return len(self.vocabulary)


# ---------------------------------------------------------------------------
# linear SVM


@dataclass
class LinearSVM:
    weights: np.ndarray
    bias: float

    def decision(self, vec: SparseVec) -> float:
        return sum(self.weights[i] * v for i, v in vec.items()) + self.bias


def _objective(model: LinearSVM, vectors: list[SparseVec], signs: np.ndarray, c: float) -> float:
    reg = 0.5 * float(model.weights @ model.weights)
    hinge = sum(max(0.0, 1.0 - s * model.decision(v)) for v, s in zip(vectors, signs))
    return reg + c * hinge


def _subgradient(model: LinearSVM, vectors: list[SparseVec], signs: np.ndarray,
                 c: float) -> tuple[np.ndarray, float]:
    gw = model.weights.copy()
    gb = 0.0
    for vec, s in zip(vectors, signs):
        if s * model.decision(vec) < 1.0:
            for i, v in vec.items():
                gw[i] -= c * s * v
            gb -= c * s
    return gw, gb


def svm_train(vectors: list[SparseVec], labels: list[int], c: float = DEFAULT_C,
              dim: int | None = None, seed: int = 0, max_epochs: int = 2000,
              tol: float = 1e-4) -> tuple[LinearSVM, list[float]]:
    """Train a binary linear SVM; labels are {0, 1}. Returns the model and
    the (nonincreasing) per-epoch objective history."""
    if c <= 0:
        raise ValueError("C must be positive")
    if not vectors or len(vectors) != len(labels):
        raise ValueError("need equal-length nonempty vectors and labels")
    label_set = set(labels)
    if label_set <= {0} or label_set <= {1}:
        raise ValueError("training set is single-class; SVM needs both labels")
    if dim is None:
        dim = 1 + max((max(v) for v in vectors if v), default=-1)
    signs = np.array([1.0 if y == 1 else -1.0 for y in labels])
    rng = np.random.default_rng(seed)
    model = LinearSVM(weights=rng.normal(scale=1e-6, size=dim), bias=0.0)

    step = 1.0 / (1.0 + c * len(vectors))
    objective = _objective(model, vectors, signs, c)
    history = [objective]
    for _ in range(max_epochs):
        gw, gb = _subgradient(model, vectors, signs, c)
        accepted = False
        for _ in range(50):
            trial = LinearSVM(weights=model.weights - step * gw, bias=model.bias - step * gb)
            trial_obj = _objective(trial, vectors, signs, c)
            if trial_obj < objective:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        model = trial
        improvement = objective - trial_obj
        objective = trial_obj
        history.append(objective)
        step *= 1.5
        if improvement < tol:
            break
    return model, history


def svm_predict(model: LinearSVM, vectors: list[SparseVec]) -> list[int]:
    return [1 if model.decision(v) >= 0.0 else 0 for v in vectors]
