"""Corpus statistics over parsed screenplays."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

from .screenplay import ElementKind, ParsedScreenplay, split_sentences
from .verbs import tokenize


@dataclass(frozen=True)
class CorpusStats:
    movies: int = 0
    stage_directions: int = 0
    speech_segments: int = 0
    sentences: int = 0
    words: int = 0
    unique_words: int = 0
    genres: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def format_table(self) -> str:
        heads = ["# movies", "# scene descriptions", "# speech segs", "# sentences",
                 "# words", "# unique words", "# genres"]
        vals = [f"{v:,}" for v in asdict(self).values()]
        widths = [max(len(h), len(v)) for h, v in zip(heads, vals)]
        return ("  ".join(h.rjust(w) for h, w in zip(heads, widths)) + "\n"
                + "  ".join(v.rjust(w) for v, w in zip(vals, widths)) + "\n")


def compute_stats(parsed: Iterable[ParsedScreenplay]) -> CorpusStats:
    """Counts over the whole screenplay text (every element kind).

    Sentences use :func:`split_sentences` and words use :func:`tokenize`.
    """
    movies = directions = speech = sentences = words = 0
    vocab: set[str] = set()
    genres: set[str] = set()
    for p in parsed:
        movies += 1
        genres |= set(p.genre_tags)
        for e in p.elements:
            if e.kind is ElementKind.STAGE_DIRECTION:
                directions += 1
            elif e.kind is ElementKind.DIALOGUE:
                speech += 1
            sentences += len(split_sentences(e.text))
            toks = tokenize(e.text)
            words += len(toks)
            vocab.update(toks)
    return CorpusStats(movies, directions, speech, sentences, words, len(vocab), len(genres))
