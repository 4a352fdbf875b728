"""Subtitle ingestion and weakly-labelled clip mining."""

from __future__ import annotations

import json
import logging
import random
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .calibration import ThresholdTable
from .classifier import ClassifierModel, KeywordSpotter, ScoredPrediction
from .errors import IncompleteAnnotations, MalformedRow, NoValidCues
from .screenplay import split_sentences
from .verbs import VerbClass

log = logging.getLogger(__name__)

_TIMING = re.compile(
    r"^\s*(\d+):(\d{1,2}):(\d{1,2})[,.](\d{1,3})\s*-->\s*(\d+):(\d{1,2}):(\d{1,2})[,.](\d{1,3})")
_TAGS = re.compile(r"<[^>]*>|\{\\[^}]*\}")
_BLANK = re.compile(r"\n[ \t]*\n")


@dataclass(frozen=True)
class Cue:
    index: int
    start: float
    end: float
    text: str


@dataclass(frozen=True)
class SubtitleDocument:
    video_id: str
    cues: tuple[Cue, ...]
    duration_hint: float | None = None
    malformed_blocks: int = 0


def _ms(h, m, s, frac) -> int:
    return ((int(h) * 60 + int(m)) * 60 + int(s)) * 1000 + int(frac.ljust(3, "0"))


def parse_srt(raw: str, video_id: str, duration_hint: float | None = None) -> SubtitleDocument:
    """Parse SubRip text into cues sorted by start time.

    Markup tags are stripped and multi-line text is joined with spaces.
    Blocks with a bad index, bad timing, ``end <= start`` or no text are
    skipped and counted in ``malformed_blocks``.
    """
    text = raw.lstrip("﻿").replace("\r\n", "\n").replace("\r", "\n")
    cues: list[Cue] = []
    malformed = 0
    for block in _BLANK.split(text):
        lines = [ln for ln in block.split("\n") if ln.strip()]
        if not lines:
            continue
        if len(lines) < 2 or not lines[0].strip().isdigit():
            malformed += 1
            continue
        m = _TIMING.match(lines[1])
        if not m:
            malformed += 1
            continue
        g = m.groups()
        start, end = _ms(*g[:4]), _ms(*g[4:])
        body = " ".join(_TAGS.sub("", ln).strip() for ln in lines[2:])
        body = " ".join(body.split())
        if end <= start or not body:
            malformed += 1
            continue
        cues.append(Cue(int(lines[0].strip()), start / 1000, end / 1000, body))
    if not cues:
        raise NoValidCues(f"{video_id}: no valid cues ({malformed} malformed blocks)")
    cues.sort(key=lambda c: c.start)
    return SubtitleDocument(video_id, tuple(cues), duration_hint, malformed)


def read_durations(path) -> dict[str, float]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            try:
                out[parts[0]] = float(parts[1])
            except (IndexError, ValueError):
                raise MalformedRow(line_no, "expected video_id<TAB>seconds") from None
    return out


def iter_srt_files(root) -> list[Path]:
    root = Path(root)
    if root.is_file():
        return [root]
    return sorted(p for p in root.rglob("*") if p.suffix.lower() == ".srt" and p.is_file())


def load_documents(paths: Iterable[Path], durations: Mapping[str, float] | None = None,
                   failures: list | None = None) -> Iterator[SubtitleDocument]:
    """Lazily parse subtitle files; unreadable ones are logged and skipped."""
    durations = durations or {}
    for path in paths:
        vid = path.stem
        try:
            raw = path.read_text(encoding="utf-8-sig")
            yield parse_srt(raw, vid, durations.get(vid))
        except (NoValidCues, UnicodeDecodeError, OSError) as exc:
            log.warning("skipping %s: %s", path, exc)
            if failures is not None:
                failures.append((vid, str(exc)))


# --- clip windows ------------------------------------------------------------

def clip_window(cue_start: float, cue_end: float, clip_length: float = 10.0,
                duration: float | None = None) -> tuple[float, float, bool]:
    """Window of ``clip_length`` centred on the cue midpoint.

    With a known ``duration`` the window is shifted to stay inside the video
    (and shrunk only if the video is shorter than the clip).  Returns
    ``(start, end, clamped)``.
    """
    mid = (cue_start + cue_end) / 2
    start, end = mid - clip_length / 2, mid + clip_length / 2
    if duration is None:
        return start, end, False
    if duration <= clip_length:
        clamped = start != 0 or end != duration
        return 0.0, float(duration), clamped
    if start < 0:
        return 0.0, float(clip_length), True
    if end > duration:
        return float(duration - clip_length), float(duration), True
    return start, end, False


@dataclass(frozen=True)
class ClipManifestEntry:
    video_id: str
    label: str
    clip_start: float
    clip_end: float
    source_sentence: str
    confidence: float
    cue_span: tuple[float, float]
    sentence_id: str = ""
    clamped: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cue_span"] = list(self.cue_span)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ClipManifestEntry":
        return cls(d["video_id"], d["label"], float(d["clip_start"]), float(d["clip_end"]),
                   d["source_sentence"], float(d["confidence"]), tuple(d["cue_span"]),
                   d.get("sentence_id", ""), bool(d.get("clamped", False)))


def sentence_id(video_id: str, cue_index: int, sentence_no: int) -> str:
    return f"{video_id}:{cue_index}:{sentence_no}"


def iter_sentences(doc: SubtitleDocument):
    """Yield ``(sentence_id, cue, sentence)``; unpunctuated captions stay whole."""
    for cue in doc.cues:
        for k, sent in enumerate(split_sentences(cue.text)):
            yield sentence_id(doc.video_id, cue.index, k), cue, sent


# --- capped sampling ---------------------------------------------------------

class ClassReservoir:
    """Uniform fixed-size sample of a stream (Algorithm R)."""

    def __init__(self, capacity: int, rng: random.Random):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self.rng = rng
        self.seen = 0
        self.items: list = []

    def slot(self) -> int | None:
        """Count one stream item and return where to store it (None: discard)."""
        n = self.seen
        self.seen += 1
        if n < self.capacity:
            self.items.append(None)
            return n
        j = self.rng.randrange(n + 1)
        return j if j < self.capacity else None

    def offer(self, item) -> None:
        j = self.slot()
        if j is not None:
            self.items[j] = item


class CappedSink:
    """Per-class reservoirs with deterministic per-class random streams."""

    def __init__(self, cap: int, seed: int):
        self.cap = cap
        self.seed = seed
        self.reservoirs: dict[str, ClassReservoir] = {}
        self._seq = 0

    def offer(self, label: str, make: Callable[[], ClipManifestEntry]) -> None:
        """Offer one candidate; ``make`` builds the entry only if it is kept."""
        res = self.reservoirs.get(label)
        if res is None:
            res = self.reservoirs[label] = ClassReservoir(self.cap, random.Random(f"{self.seed}:{label}"))
        j = res.slot()
        if j is not None:
            res.items[j] = (self._seq, make())
        self._seq += 1

    def entries(self) -> list[ClipManifestEntry]:
        kept = [item for res in self.reservoirs.values() for item in res.items]
        kept.sort(key=lambda t: t[0])
        return [e for _, e in kept]

    def candidates(self) -> dict[str, int]:
        return {k: r.seen for k, r in sorted(self.reservoirs.items())}


@dataclass
class MiningResult:
    entries: list[ClipManifestEntry]
    candidates: dict[str, int]
    emitted: dict[str, int]
    documents: int = 0
    sentences: int = 0
    failed: list[tuple[str, str]] = field(default_factory=list)

    def write(self, manifest_path, summary_path=None) -> None:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            for e in self.entries:
                fh.write(e.to_json() + "\n")
        if summary_path is not None:
            with open(summary_path, "w", encoding="utf-8") as fh:
                fh.write("class\tcandidates\temitted\n")
                for k in sorted(self.candidates):
                    fh.write(f"{k}\t{self.candidates[k]}\t{self.emitted.get(k, 0)}\n")


# --- scorers -------------------------------------------------------------------

class ModelScorer:
    def __init__(self, model: ClassifierModel):
        self.model = model

    def __call__(self, ids: Sequence[str], sentences: Sequence[str]) -> list[ScoredPrediction | None]:
        return self.model.predict_many(list(sentences))


class ExternalScorer:
    """Looks predictions up by sentence id; unknown ids are skipped."""

    def __init__(self, table: Mapping[str, ScoredPrediction]):
        self.table = table

    def __call__(self, ids: Sequence[str], sentences: Sequence[str]) -> list[ScoredPrediction | None]:
        return [self.table.get(i) for i in ids]


def as_scorer(model_or_scores) -> Callable:
    if isinstance(model_or_scores, ClassifierModel):
        return ModelScorer(model_or_scores)
    if isinstance(model_or_scores, Mapping):
        return ExternalScorer(model_or_scores)
    if callable(model_or_scores):
        return model_or_scores
    raise TypeError("expected a ClassifierModel, a score table or a scorer callable")


def _make_entry(doc, cue, sid, sent, label, conf, clip_length) -> ClipManifestEntry:
    start, end, clamped = clip_window(cue.start, cue.end, clip_length, doc.duration_hint)
    return ClipManifestEntry(doc.video_id, label, start, end, sent, conf,
                             (cue.start, cue.end), sid, clamped)


def mine_clips(docs: Iterable[SubtitleDocument], model, thresholds: ThresholdTable,
               clip_length: float = 10.0, per_class_cap: int = 40000, seed: int = 0) -> MiningResult:
    """Label caption sentences whose top class clears that class's threshold.

    ``model`` is a :class:`ClassifierModel`, a mapping of sentence id to
    external predictions, or any callable ``(ids, sentences) -> predictions``.
    Only the argmax class can label a sentence.  Classes with more than
    ``per_class_cap`` accepted sentences are reservoir-sampled down to the
    cap, so memory stays proportional to the cap, not the corpus.
    """
    if not len(thresholds):
        raise ValueError("threshold table is empty")
    scorer = as_scorer(model)
    sink = CappedSink(per_class_cap, seed)
    n_docs = n_sent = 0
    failed = []
    for doc in docs:
        try:
            rows = list(iter_sentences(doc))
            preds = scorer([r[0] for r in rows], [r[2] for r in rows]) if rows else []
        except Exception as exc:  # one bad document must not stop the run
            log.warning("scoring failed for %s: %s", doc.video_id, exc)
            failed.append((doc.video_id, str(exc)))
            continue
        n_docs += 1
        n_sent += len(rows)
        for (sid, cue, sent), pred in zip(rows, preds):
            if pred is None:
                continue
            k = pred.argmax_index
            label, conf = pred.class_list[k], pred.scores[k]
            limit = thresholds.threshold(label)
            if limit is None or conf < limit:
                continue
            sink.offer(label, partial(_make_entry, doc, cue, sid, sent, label, conf, clip_length))
    entries = sink.entries()
    return MiningResult(entries, sink.candidates(), dict(Counter(e.label for e in entries)), n_docs, n_sent, failed)


def mine_clips_baseline(docs: Iterable[SubtitleDocument], verb_classes: Sequence[VerbClass],
                        clip_length: float = 10.0, per_class_cap: int = 40000, seed: int = 0) -> MiningResult:
    """Keyword-spotting variant: one entry per matched class, confidence 1.0."""
    spot = KeywordSpotter(verb_classes)
    order = {vc.stem: i for i, vc in enumerate(verb_classes)}
    sink = CappedSink(per_class_cap, seed)
    n_docs = n_sent = 0
    for doc in docs:
        n_docs += 1
        for sid, cue, sent in iter_sentences(doc):
            n_sent += 1
            for label in sorted(spot(sent), key=order.__getitem__):
                sink.offer(label, partial(_make_entry, doc, cue, sid, sent, label, 1.0, clip_length))
    entries = sink.entries()
    return MiningResult(entries, sink.candidates(), dict(Counter(e.label for e in entries)), n_docs, n_sent)


def read_manifest(path) -> list[ClipManifestEntry]:
    with open(path, encoding="utf-8") as fh:
        return [ClipManifestEntry.from_dict(json.loads(line)) for line in fh if line.strip()]


# --- manual verification ---------------------------------------------------------

@dataclass(frozen=True)
class AnnotationRecord:
    row_id: int
    is_true_positive: bool
    note: str = ""


def read_annotations(path) -> list[AnnotationRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2 or parts[1].strip() not in ("0", "1"):
                raise MalformedRow(line_no, "expected manifest_row_id<TAB>0|1<TAB>note")
            try:
                row = int(parts[0])
            except ValueError:
                raise MalformedRow(line_no, f"bad row id {parts[0]!r}") from None
            out.append(AnnotationRecord(row, parts[1].strip() == "1", "\t".join(parts[2:])))
    return out


def sample_rows(entries: Sequence[ClipManifestEntry], sample_size: int = 100, seed: int = 0) -> dict[str, list[int]]:
    """Seeded per-class sample of manifest row ids (row id = line position)."""
    by_class: dict[str, list[int]] = {}
    for row, e in enumerate(entries):
        by_class.setdefault(e.label, []).append(row)
    out = {}
    for label in sorted(by_class):
        rows = by_class[label]
        k = min(sample_size, len(rows))
        out[label] = sorted(random.Random(f"{seed}:{label}").sample(rows, k))
    return out


@dataclass(frozen=True)
class ClassEvaluation:
    label: str
    true_positives: int
    sampled: int

    @property
    def rate(self) -> float:
        return self.true_positives / self.sampled if self.sampled else float("nan")


def evaluate_manifest(entries: Sequence[ClipManifestEntry], annotations: Iterable[AnnotationRecord],
                      sample_size: int = 100, seed: int = 0) -> dict[str, ClassEvaluation]:
    """True positives among a seeded sample of each class's clips.

    Every sampled row needs an annotation; otherwise
    :class:`IncompleteAnnotations` lists the gaps.
    """
    labels = {a.row_id: a for a in annotations}
    sample = sample_rows(entries, sample_size, seed)
    missing = [r for rows in sample.values() for r in rows if r not in labels]
    if missing:
        raise IncompleteAnnotations(missing)
    return {label: ClassEvaluation(label, sum(labels[r].is_true_positive for r in rows), len(rows))
            for label, rows in sample.items()}


def format_evaluation(report: Mapping[str, ClassEvaluation]) -> str:
    """Two-row table: class names over true-positive counts."""
    labels = list(report)
    cells = [f"{report[k].true_positives}/{report[k].sampled}" for k in labels]
    widths = [max(len(a), len(b)) for a, b in zip(labels, cells)]
    head = "  ".join(k.rjust(w) for k, w in zip(labels, widths))
    body = "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    return f"{head}\n{body}\n"
