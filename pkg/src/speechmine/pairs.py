"""Speech/verb pairs from screenplay proximity, and movie-level splits."""

from __future__ import annotations

import bisect
import json
import random
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InsufficientMovies, NoDialogue, SmallValidationSet
from .screenplay import ElementKind, ParsedScreenplay, split_sentences
from .verbs import ConjugationTable, VerbClass, stem_of, tokenize


@dataclass(frozen=True)
class SpeechActionPair:
    movie_id: str
    sentence: str
    verb_stem: str
    direction_index: int
    dialogue_index: int
    distance: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: Mapping) -> "SpeechActionPair":
        return cls(d["movie_id"], d["sentence"], d["verb_stem"], int(d["direction_index"]),
                   int(d["dialogue_index"]), int(d["distance"]))


@dataclass(frozen=True)
class CorpusSplit:
    train_movie_ids: frozenset[str]
    val_movie_ids: frozenset[str]

    def __post_init__(self):
        if self.train_movie_ids & self.val_movie_ids:
            raise ValueError("train and validation movie sets overlap")

    def write(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for name, ids in (("train_movies.txt", self.train_movie_ids), ("val_movies.txt", self.val_movie_ids)):
            (directory / name).write_text("".join(f"{m}\n" for m in sorted(ids)), encoding="utf-8")

    @classmethod
    def read(cls, directory) -> "CorpusSplit":
        directory = Path(directory)

        def ids(name):
            return frozenset(ln.strip() for ln in (directory / name).read_text(encoding="utf-8").splitlines()
                             if ln.strip())

        return cls(ids("train_movies.txt"), ids("val_movies.txt"))


class VerbMatcher:
    """Finds in-scope verb stems mentioned in a piece of text."""

    def __init__(self, verb_classes: Sequence[VerbClass], conj: ConjugationTable | None = None):
        self.stems = {vc.stem for vc in verb_classes}
        freq = {vc.stem: vc.corpus_frequency for vc in verb_classes}
        owners: dict[str, set[str]] = {}
        for vc in verb_classes:
            for f in vc.forms:
                owners.setdefault(f, set()).add(vc.stem)
        self._form_to_stem: dict[str, str] = {}
        for form, stems in owners.items():
            stem = None
            if conj is not None and conj.stems_for(form):
                stem = stem_of(form, conj, freq)
            elif len(stems) == 1:
                stem = next(iter(stems))
            else:
                stem = min(stems, key=lambda s: (-freq.get(s, 0), s))
            if stem in self.stems:
                self._form_to_stem[form] = stem

    def stems_in(self, text: str) -> list[str]:
        """Distinct stems in order of first mention."""
        seen: dict[str, None] = {}
        for tok in tokenize(text):
            stem = self._form_to_stem.get(tok)
            if stem is not None:
                seen.setdefault(stem)
        return list(seen)


def nearest_dialogue(dialogue_indices: Sequence[int], index: int, prefer: str = "preceding") -> int:
    """Order index of the dialogue element closest to ``index``.

    ``dialogue_indices`` must be sorted.  Equal gaps go to the preceding
    element unless ``prefer="following"``.
    """
    pos = bisect.bisect_left(dialogue_indices, index)
    before = dialogue_indices[pos - 1] if pos > 0 else None
    after = dialogue_indices[pos] if pos < len(dialogue_indices) else None
    if before is None:
        return after
    if after is None:
        return before
    gap_b, gap_a = index - before, after - index
    if gap_b == gap_a:
        return before if prefer == "preceding" else after
    return before if gap_b < gap_a else after


def build_pairs(parsed: ParsedScreenplay, verb_classes: Sequence[VerbClass] | VerbMatcher,
                conj: ConjugationTable | None = None, max_distance: int | None = None,
                prefer: str = "preceding") -> list[SpeechActionPair]:
    """Label every sentence of the nearest dialogue with each verb of a stage direction.

    A (sentence, verb) combination is emitted once per dialogue block even
    if several directions point at it.
    """
    if prefer not in ("preceding", "following"):
        raise ValueError("prefer must be 'preceding' or 'following'")
    matcher = verb_classes if isinstance(verb_classes, VerbMatcher) else VerbMatcher(verb_classes, conj)
    dialogue = {e.order_index: e for e in parsed.elements if e.kind is ElementKind.DIALOGUE}
    if not dialogue:
        raise NoDialogue(f"{parsed.movie_id}: no dialogue elements")
    dialogue_indices = sorted(dialogue)
    sentences_of: dict[int, list[str]] = {}

    pairs: list[SpeechActionPair] = []
    seen: set[tuple[int, str, str]] = set()
    for el in parsed.elements:
        if el.kind is not ElementKind.STAGE_DIRECTION:
            continue
        stems = matcher.stems_in(el.text)
        if not stems:
            continue
        target = nearest_dialogue(dialogue_indices, el.order_index, prefer)
        distance = abs(target - el.order_index)
        if max_distance is not None and distance > max_distance:
            continue
        if target not in sentences_of:
            sentences_of[target] = split_sentences(dialogue[target].text)
        for stem in stems:
            for sentence in sentences_of[target]:
                key = (target, sentence, stem)
                if key in seen:
                    continue
                seen.add(key)
                pairs.append(SpeechActionPair(parsed.movie_id, sentence, stem,
                                              el.order_index, target, distance))
    return pairs


def split_corpus(movie_ids: Iterable[str], train_count: int, seed: int) -> CorpusSplit:
    """Seeded shuffle of the movie ids; the first ``train_count`` train."""
    ids = sorted(set(movie_ids))
    if train_count < 0 or train_count > len(ids):
        raise InsufficientMovies(f"train_count={train_count} but only {len(ids)} movies")
    random.Random(seed).shuffle(ids)
    split = CorpusSplit(frozenset(ids[:train_count]), frozenset(ids[train_count:]))
    if not split.val_movie_ids:
        warnings.warn("validation set is empty", SmallValidationSet, stacklevel=2)
    return split


def write_pairs(pairs: Iterable[SpeechActionPair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(p.to_json() + "\n")


def read_pairs(path) -> list[SpeechActionPair]:
    with open(path, encoding="utf-8") as fh:
        return [SpeechActionPair.from_dict(json.loads(line)) for line in fh if line.strip()]
