"""Per-class precision/recall on pseudo ground truth and mining thresholds."""

from __future__ import annotations

import json
import math
import statistics
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, NoAdmissibleThreshold, NoPositives

DEFAULT_BUCKETS = tuple((round(0.3 + 0.1 * i, 1), round(0.4 + 0.1 * i, 1)) for i in range(7))
PRECISION_FLOOR = 0.3


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float
    retrieved: int


@dataclass(frozen=True)
class PRCurve:
    class_stem: str
    points: tuple[PRPoint, ...]
    average_precision: float
    positives: int = 0

    def to_dict(self) -> dict:
        return {
            "class_stem": self.class_stem,
            "average_precision": self.average_precision,
            "positives": self.positives,
            "points": [[p.threshold, p.precision, p.recall, p.retrieved] for p in self.points],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PRCurve":
        pts = tuple(PRPoint(float(t), float(p), float(r), int(n)) for t, p, r, n in d["points"])
        return cls(d["class_stem"], pts, float(d["average_precision"]), int(d.get("positives", 0)))


def curve_from_scores(scores, is_positive, class_stem: str = "", ap_method: str = "step") -> PRCurve:
    """PR curve of one-vs-rest ``scores`` with boolean ``is_positive``.

    Items sharing a score form one operating point, so precision is only
    measured after the whole tied group is retrieved.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(is_positive, dtype=bool)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D and equally long")
    n_pos = int(y.sum())
    if n_pos == 0:
        raise NoPositives(f"class {class_stem!r} has no positives")

    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of each tied score group
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[ends]
    retrieved = ends + 1
    precision = tp / retrieved
    recall = tp / n_pos
    points = tuple(PRPoint(float(t), float(p), float(r), int(n))
                   for t, p, r, n in zip(s[ends], precision, recall, retrieved))
    return PRCurve(class_stem, points, average_precision(points, ap_method), n_pos)


def average_precision(points: Sequence[PRPoint], method: str = "step") -> float:
    """Area under the PR curve.

    ``step``: sum of precision times recall increment (no interpolation).
    ``11point``: mean of the best precision at recall >= 0, 0.1, ..., 1.
    """
    if method == "step":
        ap, prev = 0.0, 0.0
        for p in points:
            ap += (p.recall - prev) * p.precision
            prev = p.recall
        return ap
    if method == "11point":
        rec = np.array([p.recall for p in points])
        prec = np.array([p.precision for p in points])
        total = 0.0
        for r in np.linspace(0, 1, 11):
            mask = rec >= r - 1e-12
            total += prec[mask].max() if mask.any() else 0.0
        return total / 11
    raise ValueError(f"unknown AP method {method!r}")


def pr_curve(predictions, labels, class_stem: str, ap_method: str = "step") -> PRCurve:
    """One-vs-rest curve for ``class_stem``.

    A prediction is positive when any pseudo-ground-truth label attached to
    its sentence equals ``class_stem``.
    """
    positive_sentences = {p.sentence for p in labels if p.verb_stem == class_stem}
    scores = [pr.score_of(class_stem) for pr in predictions]
    flags = [pr.sentence in positive_sentences for pr in predictions]
    return curve_from_scores(scores, flags, class_stem, ap_method)


def select_discriminative(curves: Sequence[PRCurve], ap_cutoff: float = 0.01) -> list[str]:
    return [c.class_stem for c in curves if c.average_precision > ap_cutoff]


@dataclass(frozen=True)
class ThresholdEntry:
    threshold: float
    target_precision: float
    expected_yield: int
    computed_threshold: float | None = None
    bucket: tuple[float, float] | None = None


@dataclass
class ThresholdTable:
    entries: dict[str, ThresholdEntry] = field(default_factory=dict)
    overrides: dict[str, float] = field(default_factory=dict)
    precision_floor: float = PRECISION_FLOOR

    def threshold(self, stem: str) -> float | None:
        """Effective threshold (overrides already folded in), or None."""
        e = self.entries.get(stem)
        return None if e is None else e.threshold

    def __contains__(self, stem: str) -> bool:
        return stem in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        return {
            "precision_floor": self.precision_floor,
            "entries": {
                k: {"threshold": e.threshold, "target_precision": e.target_precision,
                    "expected_yield": e.expected_yield, "computed_threshold": e.computed_threshold,
                    "bucket": list(e.bucket) if e.bucket else None}
                for k, e in sorted(self.entries.items())
            },
            "overrides": dict(sorted(self.overrides.items())),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, d: Mapping) -> "ThresholdTable":
        entries = {}
        for k, e in d["entries"].items():
            bucket = tuple(e["bucket"]) if e.get("bucket") else None
            entries[k] = ThresholdEntry(float(e["threshold"]), float(e["target_precision"]),
                                        int(e["expected_yield"]), e.get("computed_threshold"), bucket)
        return cls(entries, {k: float(v) for k, v in d.get("overrides", {}).items()},
                   float(d.get("precision_floor", PRECISION_FLOOR)))

    @classmethod
    def load(cls, path) -> "ThresholdTable":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def validate_buckets(buckets: Sequence[tuple[float, float]], floor: float = PRECISION_FLOOR):
    bs = sorted((float(lo), float(hi)) for lo, hi in buckets)
    if not bs:
        raise ConfigError("calibration.buckets", "no buckets")
    if not math.isclose(bs[0][0], floor) or not math.isclose(bs[-1][1], 1.0):
        raise ConfigError("calibration.buckets", f"buckets must span [{floor}, 1.0]")
    for lo, hi in bs:
        if not lo < hi:
            raise ConfigError("calibration.buckets", f"empty bucket {lo}-{hi}")
    for (_, hi), (nlo, _) in zip(bs, bs[1:]):
        if not math.isclose(hi, nlo):
            raise ConfigError("calibration.buckets", f"gap or overlap at {hi}")
    return bs


def _bucket_of(precision: float, buckets) -> int | None:
    for i, (lo, hi) in enumerate(buckets):
        last = i == len(buckets) - 1
        if lo <= precision < hi or (last and precision == hi):
            return i
    return None


def bucket_candidates(curve: PRCurve, buckets, floor: float = PRECISION_FLOOR):
    """Per bucket, the admissible point with the largest yield.

    Returns ``{bucket_index: PRPoint}``; points below ``floor`` never enter.
    """
    best: dict[int, PRPoint] = {}
    for p in curve.points:
        if p.precision < floor:
            continue
        b = _bucket_of(p.precision, buckets)
        if b is None:
            continue
        cur = best.get(b)
        if cur is None or p.retrieved > cur.retrieved:
            best[b] = p
    return best


def derive_thresholds(curves: Sequence[PRCurve], buckets=DEFAULT_BUCKETS, balance_target: int | None = None,
                      overrides: Mapping[str, float] | None = None, precision_floor: float = PRECISION_FLOOR,
                      yield_fn=None) -> ThresholdTable:
    """Pick one mining threshold per class.

    Candidate operating points at or above ``precision_floor`` are grouped
    into precision buckets; each class takes the bucket whose yield is
    closest to ``balance_target`` (ties: the lowest-precision bucket), using
    the largest-yield point inside it.  ``balance_target`` defaults to the
    median of the per-class maximum admissible yields.  ``yield_fn(stem,
    threshold)`` replaces the validation-set retrieval count as the yield
    estimate when given.  Overrides are applied last.
    """
    bs = validate_buckets(buckets, precision_floor)
    overrides = dict(overrides or {})

    def yield_of(stem, p: PRPoint) -> int:
        return int(yield_fn(stem, p.threshold)) if yield_fn is not None else p.retrieved

    options: dict[str, dict[int, tuple[PRPoint, int]]] = {}
    for curve in curves:
        cands = bucket_candidates(curve, bs, precision_floor)
        if not cands:
            warnings.warn(f"class {curve.class_stem!r} never reaches precision {precision_floor}; dropped",
                          NoAdmissibleThreshold, stacklevel=2)
            continue
        options[curve.class_stem] = {b: (p, yield_of(curve.class_stem, p)) for b, p in cands.items()}

    if balance_target is None and options:
        balance_target = int(statistics.median(max(y for _, y in opts.values()) for opts in options.values()))

    entries: dict[str, ThresholdEntry] = {}
    for stem, opts in options.items():
        b = min(opts, key=lambda i: (abs(opts[i][1] - balance_target), i))
        p, y = opts[b]
        entries[stem] = ThresholdEntry(p.threshold, p.precision, y, p.threshold, bs[b])

    by_stem = {c.class_stem: c for c in curves}
    applied = {}
    for stem, value in overrides.items():
        if stem not in entries:
            warnings.warn(f"override for {stem!r} ignored: class has no admissible threshold",
                          NoAdmissibleThreshold, stacklevel=2)
            continue
        value = float(value)
        p = operating_point(by_stem[stem], value)
        if yield_fn is not None:
            y = int(yield_fn(stem, value))
        else:
            y = 0 if p is None else p.retrieved
        prec = float("nan") if p is None else p.precision
        old = entries[stem]
        entries[stem] = ThresholdEntry(value, prec, y, old.computed_threshold, None)
        applied[stem] = value
    return ThresholdTable(entries, applied, precision_floor)


def operating_point(curve: PRCurve, threshold: float) -> PRPoint | None:
    """The curve point reached when retrieving every score >= ``threshold``."""
    eligible = [p for p in curve.points if p.threshold >= threshold]
    return eligible[-1] if eligible else None


def save_curves(curves: Sequence[PRCurve], path) -> None:
    Path(path).write_text(json.dumps([c.to_dict() for c in curves]) + "\n", encoding="utf-8")


def load_curves(path) -> list[PRCurve]:
    return [PRCurve.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]
