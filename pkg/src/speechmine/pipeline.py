"""Pipeline stages.

Each stage reads declared artifacts from the run directory, writes its own
outputs there and appends a provenance record (input and output digests)
to ``MANIFEST.jsonl``.  Outputs carry no timestamps, so identical inputs and
seeds reproduce them byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from . import calibration as cal
from .classifier import ClassifierModel, accuracy, load_external_scores, train
from .config import PipelineConfig
from .errors import DataError, EmptyCorpus, EmptyInput, MissingArtifact, NoDialogue, NoPositives
from .mining import (
    evaluate_manifest, format_evaluation, iter_sentences, iter_srt_files, load_documents,
    mine_clips, mine_clips_baseline, read_annotations, read_durations, read_manifest, sample_rows,
)
from .pairs import CorpusSplit, VerbMatcher, build_pairs, read_pairs, split_corpus, write_pairs
from .screenplay import ParsedScreenplay, RawScreenplay, parse_screenplay
from .stats import compute_stats
from .verbs import ConjugationTable, PosLexicon, mine_verb_classes, read_verb_classes, write_verb_classes

log = logging.getLogger(__name__)

STAGES = ("parse", "mine-verbs", "build-pairs", "train", "calibrate",
          "mine-clips", "mine-clips-baseline", "stats", "eval")


class Run:
    """Paths of every artifact inside one run directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.parsed = self.root / "parsed"
        self.movies = self.parsed / "movies.tsv"
        self.verb_classes = self.root / "verb_classes.jsonl"
        self.pairs = self.root / "pairs.jsonl"
        self.split = self.root / "split"
        self.model = self.root / "model.json"
        self.curves = self.root / "curves.json"
        self.thresholds = self.root / "thresholds.json"
        self.manifest = self.root / "manifest.jsonl"
        self.manifest_summary = self.root / "manifest_summary.tsv"
        self.baseline = self.root / "manifest_baseline.jsonl"
        self.baseline_summary = self.root / "manifest_baseline_summary.tsv"
        self.stats = self.root / "stats.json"
        self.eval_report = self.root / "eval_report.tsv"
        self.eval_sample = self.root / "eval_sample.tsv"
        self.provenance = self.root / "MANIFEST.jsonl"

    def need(self, name: str, path: Path) -> Path:
        if not path.exists():
            raise MissingArtifact(name, path)
        return path


def _digest(path: Path) -> dict[str, str]:
    if path.is_dir():
        out = {}
        for p in sorted(q for q in path.rglob("*") if q.is_file()):
            out.update(_digest(p))
        return out
    return {str(path): hashlib.sha256(path.read_bytes()).hexdigest()}


def _record(run: Run, stage: str, inputs, outputs) -> None:
    rec = {
        "stage": stage,
        "finished": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "inputs": {k: v for p in inputs if p is not None and Path(p).exists() for k, v in _digest(Path(p)).items()},
        "outputs": {k: v for p in outputs if Path(p).exists() for k, v in _digest(Path(p)).items()},
    }
    with open(run.provenance, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _lexicon(cfg: PipelineConfig) -> PosLexicon:
    return PosLexicon.load(cfg.paths.lexicon) if cfg.paths.lexicon else PosLexicon.default()


def _conj(cfg: PipelineConfig) -> ConjugationTable:
    return ConjugationTable.load(cfg.paths.conjugations) if cfg.paths.conjugations else ConjugationTable.default()


def _read_genres(path) -> dict[str, frozenset[str]]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            movie, _, tags = line.partition("\t")
            out[movie.strip()] = frozenset(t.strip() for t in tags.split(",") if t.strip())
    return out


def load_parsed(run: Run) -> list[ParsedScreenplay]:
    run.need("parsed", run.movies)
    out = []
    for line in run.movies.read_text(encoding="utf-8").splitlines()[1:]:
        movie, unparsed, genres = line.split("\t")
        tags = [g for g in genres.split(",") if g]
        out.append(ParsedScreenplay.read_jsonl(run.parsed / f"{movie}.jsonl", movie, int(unparsed), tags))
    return out


# --- stages --------------------------------------------------------------------

def stage_parse(cfg: PipelineConfig, run: Run) -> None:
    src = cfg.paths.screenplay_dir
    if src is None:
        raise MissingArtifact("paths.screenplay_dir")
    files = sorted(Path(src).glob("*.txt"))
    if not files:
        raise EmptyCorpus(f"no .txt screenplays in {src}")
    genres = _read_genres(cfg.paths.genres) if cfg.paths.genres else {}
    run.parsed.mkdir(parents=True, exist_ok=True)
    for stale in run.parsed.glob("*.jsonl"):
        stale.unlink()
    rows = ["movie_id\tunparsed_line_count\tgenres\n"]
    for path in files:
        raw = RawScreenplay.from_file(path, genres.get(path.stem, ()))
        try:
            parsed = parse_screenplay(raw, cfg.grammar)
        except EmptyInput as exc:
            log.warning("skipping %s: %s", path.name, exc)
            continue
        parsed.write_jsonl(run.parsed / f"{parsed.movie_id}.jsonl")
        rows.append(f"{parsed.movie_id}\t{parsed.unparsed_line_count}\t{','.join(sorted(parsed.genre_tags))}\n")
    run.movies.write_text("".join(rows), encoding="utf-8")
    _record(run, "parse", [src, cfg.paths.genres, cfg.paths.grammar], [run.parsed])


def stage_mine_verbs(cfg: PipelineConfig, run: Run) -> None:
    parsed = load_parsed(run)
    directions = [e for p in parsed for e in p.elements if e.kind.value == "StageDirection"]
    classes = mine_verb_classes(directions, _lexicon(cfg), _conj(cfg), cfg.verbs.min_count, cfg.verbs.stop_top_k)
    write_verb_classes(classes, run.verb_classes)
    log.info("%d verb classes kept", len(classes))
    _record(run, "mine-verbs", [run.parsed, cfg.paths.lexicon, cfg.paths.conjugations], [run.verb_classes])


def stage_build_pairs(cfg: PipelineConfig, run: Run) -> None:
    parsed = load_parsed(run)
    classes = read_verb_classes(run.need("verb_classes", run.verb_classes))
    matcher = VerbMatcher(classes, _conj(cfg))
    pairs = []
    for p in parsed:
        try:
            pairs.extend(build_pairs(p, matcher, max_distance=cfg.pairs.max_distance, prefer=cfg.pairs.prefer))
        except NoDialogue as exc:
            log.warning("skipping screenplay: %s", exc)
    write_pairs(pairs, run.pairs)
    split = split_corpus([p.movie_id for p in parsed], cfg.split.train_count, cfg.split.seed)
    split.write(run.split)
    _record(run, "build-pairs", [run.parsed, run.verb_classes], [run.pairs, run.split])


def _split(run: Run) -> CorpusSplit:
    run.need("split", run.split / "train_movies.txt")
    return CorpusSplit.read(run.split)


def stage_train(cfg: PipelineConfig, run: Run) -> None:
    pairs = read_pairs(run.need("pairs", run.pairs))
    classes = [vc.stem for vc in read_verb_classes(run.need("verb_classes", run.verb_classes))]
    split = _split(run)
    train_pairs = [p for p in pairs if p.movie_id in split.train_movie_ids]
    model = train(train_pairs, classes, cfg.train)
    model.training_meta["train_accuracy"] = accuracy(model, train_pairs)
    model.save(run.model)
    log.info("trained on %d pairs, loss %.4f -> %.4f", len(train_pairs),
             model.training_meta["initial_loss"], model.training_meta["final_loss"])
    _record(run, "train", [run.pairs, run.verb_classes, run.split], [run.model])


def validation_predictions(cfg: PipelineConfig, run: Run, val_pairs):
    sentences = sorted({p.sentence for p in val_pairs})
    if cfg.calibration.external_scores is not None:
        classes = [vc.stem for vc in read_verb_classes(run.need("verb_classes", run.verb_classes))]
        table = load_external_scores(cfg.calibration.external_scores, classes)
        return [table[s] for s in sentences if s in table]
    model = ClassifierModel.load(run.need("model", run.model))
    return model.predict_many(sentences)


def stage_calibrate(cfg: PipelineConfig, run: Run) -> None:
    pairs = read_pairs(run.need("pairs", run.pairs))
    split = _split(run)
    val_pairs = [p for p in pairs if p.movie_id in split.val_movie_ids]
    if not val_pairs:
        raise EmptyCorpus("no validation pairs to calibrate on")
    preds = validation_predictions(cfg, run, val_pairs)
    if not preds:
        raise EmptyCorpus("no validation predictions")
    curves = []
    for stem in preds[0].class_list:
        try:
            curves.append(cal.pr_curve(preds, val_pairs, stem, cfg.calibration.ap_method))
        except NoPositives:
            log.info("class %s has no validation positives", stem)
    cal.save_curves(curves, run.curves)
    keep = set(cal.select_discriminative(curves, cfg.calibration.ap_cutoff))
    table = cal.derive_thresholds([c for c in curves if c.class_stem in keep], cfg.calibration.buckets,
                                  cfg.calibration.balance_target, dict(cfg.overrides),
                                  cfg.calibration.precision_floor)
    table.save(run.thresholds)
    log.info("%d/%d classes discriminative, %d with thresholds", len(keep), len(curves), len(table))
    _record(run, "calibrate", [run.pairs, run.split, run.model, cfg.calibration.external_scores],
            [run.curves, run.thresholds])


def _documents(cfg: PipelineConfig, failures: list):
    if cfg.paths.subtitle_dir is None:
        raise MissingArtifact("paths.subtitle_dir")
    durations = read_durations(cfg.paths.durations) if cfg.paths.durations else {}
    return load_documents(iter_srt_files(cfg.paths.subtitle_dir), durations, failures)


def stage_mine_clips(cfg: PipelineConfig, run: Run) -> None:
    thresholds = cal.ThresholdTable.load(run.need("thresholds", run.thresholds))
    if cfg.mining.external_scores is not None:
        classes = [vc.stem for vc in read_verb_classes(run.need("verb_classes", run.verb_classes))]
        scorer = load_external_scores(cfg.mining.external_scores, classes)
    else:
        scorer = ClassifierModel.load(run.need("model", run.model))
    if not len(thresholds):
        raise DataError("threshold table is empty: no class reached the precision floor")
    failures: list = []
    result = mine_clips(_documents(cfg, failures), scorer, thresholds, cfg.mining.clip_length,
                        cfg.mining.per_class_cap, cfg.mining.seed)
    result.write(run.manifest, run.manifest_summary)
    log.info("%d clips from %d documents", len(result.entries), result.documents)
    _record(run, "mine-clips", [run.thresholds, run.model, cfg.paths.subtitle_dir, cfg.paths.durations,
                                cfg.mining.external_scores], [run.manifest, run.manifest_summary])


def stage_mine_clips_baseline(cfg: PipelineConfig, run: Run) -> None:
    classes = read_verb_classes(run.need("verb_classes", run.verb_classes))
    if cfg.mining.baseline_classes == "selected":
        selected = cal.ThresholdTable.load(run.need("thresholds", run.thresholds)).entries
        classes = [vc for vc in classes if vc.stem in selected]
    failures: list = []
    result = mine_clips_baseline(_documents(cfg, failures), classes, cfg.mining.clip_length,
                                 cfg.mining.per_class_cap, cfg.mining.seed)
    result.write(run.baseline, run.baseline_summary)
    _record(run, "mine-clips-baseline", [run.verb_classes, cfg.paths.subtitle_dir, cfg.paths.durations],
            [run.baseline, run.baseline_summary])


def stage_stats(cfg: PipelineConfig, run: Run) -> None:
    stats = compute_stats(load_parsed(run))
    run.stats.write_text(json.dumps(stats.as_dict(), indent=2) + "\n", encoding="utf-8")
    print(stats.format_table(), end="")
    _record(run, "stats", [run.parsed], [run.stats])


def stage_eval(cfg: PipelineConfig, run: Run) -> None:
    path = run.manifest if cfg.eval.manifest == "manifest" else run.baseline
    entries = read_manifest(run.need(cfg.eval.manifest, path))
    if cfg.eval.annotations is None:
        _write_worksheet(run, entries, cfg)
        raise MissingArtifact("eval.annotations", run.eval_sample)
    annotations = read_annotations(cfg.eval.annotations)
    try:
        report = evaluate_manifest(entries, annotations, cfg.eval.sample_size, cfg.eval.seed)
    except DataError:
        _write_worksheet(run, entries, cfg)
        raise
    with open(run.eval_report, "w", encoding="utf-8") as fh:
        fh.write("class\ttrue_positives\tsampled\n")
        for label, ev in report.items():
            fh.write(f"{label}\t{ev.true_positives}\t{ev.sampled}\n")
    print(format_evaluation(report), end="")
    _record(run, "eval", [path, cfg.eval.annotations], [run.eval_report])


def _write_worksheet(run: Run, entries, cfg: PipelineConfig) -> None:
    """Annotation template for the seeded sample (fill the 0|1 column)."""
    sample = sample_rows(entries, cfg.eval.sample_size, cfg.eval.seed)
    with open(run.eval_sample, "w", encoding="utf-8") as fh:
        fh.write("# manifest_row_id\t0|1\tnote (label, video, window, sentence)\n")
        for label, rows in sample.items():
            for r in rows:
                e = entries[r]
                fh.write(f"{r}\t\t{label} | {e.video_id} {e.clip_start:.3f}-{e.clip_end:.3f} | {e.source_sentence}\n")


STAGE_FUNCS: dict[str, Callable[[PipelineConfig, Run], None]] = {
    "parse": stage_parse,
    "mine-verbs": stage_mine_verbs,
    "build-pairs": stage_build_pairs,
    "train": stage_train,
    "calibrate": stage_calibrate,
    "mine-clips": stage_mine_clips,
    "mine-clips-baseline": stage_mine_clips_baseline,
    "stats": stage_stats,
    "eval": stage_eval,
}


def run_stage(stage: str, cfg: PipelineConfig) -> Run:
    if stage not in STAGE_FUNCS:
        raise ValueError(f"unknown stage {stage!r}")
    run = Run(cfg.paths.output_dir)
    run.root.mkdir(parents=True, exist_ok=True)
    STAGE_FUNCS[stage](cfg, run)
    return run


def export_sentences(cfg: PipelineConfig, path) -> int:
    """Write ``sentence_id<TAB>sentence`` for every caption sentence (for external scoring)."""
    failures: list = []
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for doc in _documents(cfg, failures):
            for sid, _, sent in iter_sentences(doc):
                fh.write(f"{sid}\t{sent}\n")
                n += 1
    return n
