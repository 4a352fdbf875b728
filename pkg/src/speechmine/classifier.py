"""Sentence-to-verb scoring.

Three scorers share one prediction type:

* a bag-of-words (unigram + bigram) multinomial logistic regression trained
  with mini-batch gradient descent on mean softmax cross-entropy,
* the keyword-spotting baseline, which fires on literal verb forms,
* an adapter for score tables produced by an external model.
"""

from __future__ import annotations

import json
import logging
import random
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .errors import DegenerateClasses, EmptyTraining, MalformedRow, RenormalizedScores, UnknownClass
from .verbs import VerbClass, tokenize

log = logging.getLogger(__name__)


def ngrams(tokens: Sequence[str]) -> list[str]:
    return list(tokens) + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


@dataclass(frozen=True)
class FeatureVector:
    indices: tuple[int, ...]
    values: tuple[float, ...]
    dimension: int

    def dense(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        out[list(self.indices)] = self.values
        return out


def featurize(sentence: str, vocabulary: Mapping[str, int]) -> FeatureVector:
    """Unigram and bigram counts restricted to ``vocabulary``."""
    if not vocabulary:
        raise ValueError("vocabulary is empty")
    counts = Counter(vocabulary[g] for g in ngrams(tokenize(sentence)) if g in vocabulary)
    idx = tuple(sorted(counts))
    return FeatureVector(idx, tuple(float(counts[i]) for i in idx), len(vocabulary))


def build_vocabulary(sentences: Iterable[str], min_count: int = 3) -> dict[str, int]:
    counts: Counter[str] = Counter()
    for s in sentences:
        counts.update(ngrams(tokenize(s)))
    kept = sorted(g for g, c in counts.items() if c >= min_count)
    return {g: i for i, g in enumerate(kept)}


def feature_matrix(sentences: Sequence[str], vocabulary: Mapping[str, int]) -> sparse.csr_matrix:
    rows, cols, vals = [], [], []
    for r, s in enumerate(sentences):
        fv = featurize(s, vocabulary)
        rows.extend([r] * len(fv.indices))
        cols.extend(fv.indices)
        vals.extend(fv.values)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(len(sentences), len(vocabulary)))


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(W: np.ndarray, b: np.ndarray, X, Y: np.ndarray):
    """Mean cross-entropy ``-log softmax(W x + b)[y]`` and its gradients.

    ``X`` is (m, H) dense or sparse, ``Y`` is (m, K) one-hot (or any rows of
    non-negative weights summing to one).
    """
    m = X.shape[0]
    Z = np.asarray(X @ W.T) + b
    Z = Z - Z.max(axis=1, keepdims=True)
    logp = Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
    loss = -float((Y * logp).sum()) / m
    D = (np.exp(logp) - Y) / m
    gW = np.asarray((X.T @ D)).T
    gb = D.sum(axis=0)
    return loss, gW, gb


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 20
    batch_size: int = 32
    seed: int = 0
    vocab_min_count: int = 3

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0 or self.batch_size < 1 or self.vocab_min_count < 1:
            raise ValueError("epochs >= 0, batch_size >= 1 and vocab_min_count >= 1 required")


@dataclass(frozen=True)
class ScoredPrediction:
    sentence: str
    scores: tuple[float, ...]
    class_list: tuple[str, ...]

    @property
    def argmax_index(self) -> int:
        # max() keeps the first of equal scores, i.e. the lowest index
        return max(range(len(self.scores)), key=self.scores.__getitem__)

    @property
    def argmax_class(self) -> str:
        return self.class_list[self.argmax_index]

    @property
    def confidence(self) -> float:
        return self.scores[self.argmax_index]

    def score_of(self, stem: str) -> float:
        return self.scores[self.class_list.index(stem)]


@dataclass
class ClassifierModel:
    vocabulary: dict[str, int]
    weights: np.ndarray
    bias: np.ndarray
    class_list: tuple[str, ...]
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        K = len(self.class_list)
        if self.weights.shape != (K, len(self.vocabulary)) or self.bias.shape != (K,):
            raise ValueError("weight/bias shapes do not match vocabulary and class list")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("non-finite weights")

    def activations(self, X) -> np.ndarray:
        return np.asarray(X @ self.weights.T) + self.bias

    def predict_proba(self, sentences: Sequence[str]) -> np.ndarray:
        if not self.vocabulary:
            return softmax(np.tile(self.bias, (len(sentences), 1)))
        return softmax(self.activations(feature_matrix(sentences, self.vocabulary)))

    def predict(self, sentence: str) -> ScoredPrediction:
        return self.predict_many([sentence])[0]

    def predict_many(self, sentences: Sequence[str]) -> list[ScoredPrediction]:
        if not sentences:
            return []
        P = self.predict_proba(sentences)
        return [ScoredPrediction(s, tuple(row.tolist()), self.class_list) for s, row in zip(sentences, P)]

    def to_dict(self) -> dict:
        vocab = sorted(self.vocabulary, key=self.vocabulary.__getitem__)
        return {
            "format": "speechmine-bow-softmax/1",
            "class_list": list(self.class_list),
            "vocabulary": vocab,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "training_meta": self.training_meta,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ClassifierModel":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        K = len(d["class_list"])
        W = np.array(d["weights"], dtype=float).reshape(K, len(d["vocabulary"]))
        return cls({g: i for i, g in enumerate(d["vocabulary"])}, W,
                   np.array(d["bias"], dtype=float), tuple(d["class_list"]), d.get("training_meta", {}))


def train(pairs, classes: Sequence[str], config: TrainConfig | None = None) -> ClassifierModel:
    """Fit the softmax classifier on (sentence, verb) pairs.

    Every pair is one training example, so a sentence carrying several labels
    contributes one example per label.  Weights start at zero and batches are
    drawn from a seeded shuffle, which makes training bit-for-bit repeatable.
    """
    cfg = config or TrainConfig()
    pairs = list(pairs)
    if not pairs:
        raise EmptyTraining("no training pairs")
    classes = tuple(classes)
    if len(set(classes)) != len(classes):
        raise ValueError("duplicate class names")
    col = {c: i for i, c in enumerate(classes)}
    missing = {p.verb_stem for p in pairs} - set(col)
    if missing:
        raise UnknownClass(sorted(missing)[0])
    empty = [c for c in classes if c not in {p.verb_stem for p in pairs}]
    if empty:
        warnings.warn(f"classes without training pairs: {', '.join(empty)}", DegenerateClasses, stacklevel=2)

    sentences = [p.sentence for p in pairs]
    vocab = build_vocabulary(sentences, cfg.vocab_min_count)
    X = feature_matrix(sentences, vocab) if vocab else sparse.csr_matrix((len(pairs), 0))
    y = np.array([col[p.verb_stem] for p in pairs])
    K, H, m = len(classes), len(vocab), len(pairs)
    Y = np.zeros((m, K))
    Y[np.arange(m), y] = 1.0

    W = np.zeros((K, H))
    b = np.zeros(K)
    rng = random.Random(cfg.seed)
    initial_loss = loss_and_grad(W, b, X, Y)[0]
    history = [initial_loss]
    order = list(range(m))
    for epoch in range(cfg.epochs):
        rng.shuffle(order)
        for start in range(0, m, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, gW, gb = loss_and_grad(W, b, X[idx], Y[idx])
            W -= cfg.learning_rate * gW
            b -= cfg.learning_rate * gb
        history.append(loss_and_grad(W, b, X, Y)[0])
        log.debug("epoch %d loss %.6f", epoch + 1, history[-1])

    meta = {
        "seed": cfg.seed, "epochs": cfg.epochs, "learning_rate": cfg.learning_rate,
        "batch_size": cfg.batch_size, "vocab_min_count": cfg.vocab_min_count,
        "train_pairs": m, "initial_loss": initial_loss, "final_loss": history[-1],
        "loss_history": history,
    }
    return ClassifierModel(vocab, W, b, classes, meta)


def accuracy(model: ClassifierModel, pairs) -> float:
    pairs = list(pairs)
    if not pairs:
        return float("nan")
    preds = model.predict_many([p.sentence for p in pairs])
    return sum(pr.argmax_class == p.verb_stem for pr, p in zip(preds, pairs)) / len(pairs)


class KeywordSpotter:
    """Literal verb-form matcher; no word-sense disambiguation."""

    def __init__(self, verb_classes: Sequence[VerbClass]):
        self._index: dict[str, set[str]] = {}
        for vc in verb_classes:
            for f in vc.forms:
                self._index.setdefault(f, set()).add(vc.stem)

    def __call__(self, sentence: str) -> set[str]:
        out: set[str] = set()
        for tok in tokenize(sentence):
            out.update(self._index.get(tok, ()))
        return out


def keyword_baseline(sentence: str, verb_classes: Sequence[VerbClass]) -> set[str]:
    """Stems with at least one conjugated form among the sentence tokens.

    >>> from speechmine.verbs import VerbClass
    >>> keyword_baseline("Will you dance with me", [VerbClass("dance", frozenset({"dance", "danced"}), 0)])
    {'dance'}
    """
    return KeywordSpotter(verb_classes)(sentence)


def load_external_scores(path, class_list: Sequence[str], tolerance: float = 1e-6) -> dict[str, ScoredPrediction]:
    """Read ``sentence_id<TAB>class:score,class:score,...`` rows.

    Classes absent from a row score zero.  Rows whose scores do not sum to
    one within ``tolerance`` are renormalised with a warning.
    """
    class_list = tuple(class_list)
    col = {c: i for i, c in enumerate(class_list)}
    out: dict[str, ScoredPrediction] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise MalformedRow(line_no, "expected sentence_id<TAB>class:score,...")
            sid = parts[0]
            if sid in out:
                raise MalformedRow(line_no, f"duplicate sentence id {sid!r}")
            scores = [0.0] * len(class_list)
            for item in parts[1].split(","):
                name, sep, value = item.strip().rpartition(":")
                if not sep or not name:
                    raise MalformedRow(line_no, f"bad score item {item!r}")
                if name not in col:
                    raise UnknownClass(name, line_no)
                try:
                    v = float(value)
                except ValueError:
                    raise MalformedRow(line_no, f"bad score {value!r}") from None
                if not np.isfinite(v) or v < 0:
                    raise MalformedRow(line_no, f"score must be finite and non-negative, got {value}")
                scores[col[name]] = v
            total = sum(scores)
            if total <= 0:
                raise MalformedRow(line_no, "scores sum to zero")
            if abs(total - 1.0) > tolerance:
                warnings.warn(f"line {line_no}: scores sum to {total:g}, renormalised",
                              RenormalizedScores, stacklevel=2)
                scores = [s / total for s in scores]
            out[sid] = ScoredPrediction(sid, tuple(scores), class_list)
    return out
