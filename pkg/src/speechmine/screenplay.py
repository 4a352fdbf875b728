"""Layout-driven screenplay segmentation.

A screenplay is split into four element kinds using indentation,
capitalisation and punctuation: shot headings, stage directions, dialogue
blocks (speaker cue plus speech) and transitions.  Lines that fit none of
the rules are counted, never fatal.
"""

from __future__ import annotations

import enum
import json
import re
import textwrap
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, EmptyInput

DEFAULT_HEADING_PREFIXES = (
    "INT.", "EXT.", "INT/EXT", "EXT/INT", "I/E", "INT", "EXT",
    "INTERIOR", "EXTERIOR", "ESTABLISHING",
)
DEFAULT_TRANSITIONS = (
    "FADE IN:", "FADE IN.", "FADE OUT.", "FADE OUT", "FADE TO BLACK.", "CUT TO BLACK.",
    "CUT TO:", "SMASH CUT:", "MATCH CUT:", "JUMP CUT:", "DISSOLVE:", "THE END",
)
DEFAULT_IGNORE = (r"^\(?CONT(INUED|'D)\)?:?$", r"^\d+[.)]?$")


class ElementKind(str, enum.Enum):
    SHOT_HEADING = "ShotHeading"
    STAGE_DIRECTION = "StageDirection"
    DIALOGUE = "Dialogue"
    TRANSITION = "Transition"


@dataclass(frozen=True)
class GrammarConfig:
    """Layout thresholds for the screenplay grammar.

    Columns are counted after expanding tabs to ``tab_size`` spaces.
    """

    speaker_cue_column: int = 15
    dialogue_min_indent: int = 5
    action_max_indent: int = 4
    max_cue_length: int = 40
    max_inline_speaker_words: int = 4
    inline_dialogue: bool = True
    tab_size: int = 8
    heading_prefixes: tuple[str, ...] = DEFAULT_HEADING_PREFIXES
    transitions: tuple[str, ...] = DEFAULT_TRANSITIONS
    ignore_patterns: tuple[str, ...] = DEFAULT_IGNORE

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.tab_size < 1:
            raise ConfigError("grammar.tab_size", "must be >= 1")
        if self.action_max_indent < 0:
            raise ConfigError("grammar.action_max_indent", "must be >= 0")
        if self.dialogue_min_indent <= self.action_max_indent:
            raise ConfigError("grammar.dialogue_min_indent", "must exceed action_max_indent")
        if self.speaker_cue_column < self.dialogue_min_indent:
            raise ConfigError("grammar.speaker_cue_column", "must be >= dialogue_min_indent")
        if self.max_cue_length < 1:
            raise ConfigError("grammar.max_cue_length", "must be >= 1")
        for pat in self.ignore_patterns:
            try:
                re.compile(pat)
            except re.error as exc:
                raise ConfigError("grammar.ignore_patterns", f"bad regex {pat!r}: {exc}") from None

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "GrammarConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"grammar.{key}", "unknown key")
            default = known[key].default
            try:
                if isinstance(default, bool):
                    kwargs[key] = _parse_bool(raw)
                elif isinstance(default, int):
                    kwargs[key] = int(raw)
                elif key == "ignore_patterns":
                    kwargs[key] = tuple(p for p in raw.split("\n") if p.strip()) if raw.strip() else ()
                else:
                    kwargs[key] = tuple(p.strip() for p in raw.split("|") if p.strip())
            except ValueError:
                raise ConfigError(f"grammar.{key}", f"cannot parse {raw!r}") from None
        return cls(**kwargs)

    def to_mapping(self) -> dict[str, str]:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                out[f.name] = "true" if value else "false"
            elif isinstance(value, int):
                out[f.name] = str(value)
            elif f.name == "ignore_patterns":
                out[f.name] = "\n".join(value)
            else:
                out[f.name] = "|".join(value)
        return out

    @classmethod
    def load(cls, path) -> "GrammarConfig":
        return cls.from_mapping(read_kv(Path(path).read_text(encoding="utf-8")))


def _parse_bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def read_kv(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment line.

    A key may repeat, in which case values are joined with newlines
    (used for regex lists).
    """
    out: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}", f"expected key=value, got {stripped!r}")
        key, value = stripped.split("=", 1)
        key, value = key.strip(), value.strip()
        out[key] = f"{out[key]}\n{value}" if key in out else value
    return out


@dataclass(frozen=True)
class RawScreenplay:
    movie_id: str
    lines: tuple[str, ...]
    genre_tags: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.movie_id:
            raise ValueError("movie_id must be non-empty")

    @classmethod
    def from_text(cls, movie_id: str, text: str, genre_tags: Iterable[str] = ()) -> "RawScreenplay":
        if text.startswith("﻿"):
            text = text[1:]
        return cls(movie_id, tuple(text.splitlines()), frozenset(genre_tags))

    @classmethod
    def from_file(cls, path, genre_tags: Iterable[str] = ()) -> "RawScreenplay":
        path = Path(path)
        return cls.from_text(path.stem, path.read_text(encoding="utf-8"), genre_tags)


@dataclass(frozen=True)
class ScreenplayElement:
    kind: ElementKind
    text: str
    order_index: int
    line_span: tuple[int, int]
    speaker: str | None = None

    def __post_init__(self):
        if self.speaker is not None and self.kind is not ElementKind.DIALOGUE:
            raise ValueError("speaker is only allowed on Dialogue elements")
        if not self.text.strip():
            raise ValueError("element text must be non-empty")

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind.value,
            "speaker": self.speaker,
            "text": self.text,
            "order_index": self.order_index,
            "line_span": list(self.line_span),
        }, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScreenplayElement":
        return cls(
            kind=ElementKind(d["kind"]),
            text=d["text"],
            order_index=int(d["order_index"]),
            line_span=(int(d["line_span"][0]), int(d["line_span"][1])),
            speaker=d.get("speaker"),
        )


@dataclass(frozen=True)
class ParsedScreenplay:
    movie_id: str
    elements: tuple[ScreenplayElement, ...]
    unparsed_line_count: int = 0
    genre_tags: frozenset[str] = field(default_factory=frozenset)

    def attributed_line_count(self) -> int:
        return sum(e.line_span[1] - e.line_span[0] + 1 for e in self.elements)

    def write_jsonl(self, path) -> None:
        Path(path).write_text("".join(e.to_json() + "\n" for e in self.elements), encoding="utf-8")

    @classmethod
    def read_jsonl(cls, path, movie_id: str | None = None, unparsed_line_count: int = 0,
                   genre_tags: Iterable[str] = ()) -> "ParsedScreenplay":
        path = Path(path)
        elements = [ScreenplayElement.from_dict(json.loads(line))
                    for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
        return cls(movie_id or path.stem, tuple(elements), unparsed_line_count, frozenset(genre_tags))


# --- line classification -------------------------------------------------

_PAREN_EXT = re.compile(r"\s*\([^)]*\)\s*")


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip(" "))


def _is_caps(text: str) -> bool:
    return any(c.isalpha() for c in text) and not any(c.islower() for c in text)


class _Rules:
    def __init__(self, grammar: GrammarConfig):
        self.g = grammar
        self.transitions = {t.upper() for t in grammar.transitions}
        self.ignore = [re.compile(p) for p in grammar.ignore_patterns]
        self.inline = re.compile(r"^([A-Z][A-Z0-9 .'\-]*?)(?:\s*\([^)]*\))?\s*:\s+(\S.*)$")

    def is_heading(self, s: str) -> bool:
        if not _is_caps(s):
            return False
        for p in self.g.heading_prefixes:
            # a prefix ending in a letter must end a word: "INT" matches "INT KITCHEN", not "INTO"
            if s.startswith(p) and (len(s) == len(p) or not p[-1].isalnum() or not s[len(p)].isalnum()):
                return True
        return False

    def is_transition(self, s: str) -> bool:
        return _is_caps(s) and (s.endswith("TO:") or s in self.transitions)

    def is_ignored(self, s: str) -> bool:
        return any(p.match(s) for p in self.ignore)

    def is_cue(self, s: str, indent: int) -> bool:
        return (indent >= self.g.speaker_cue_column and _is_caps(s)
                and not s.startswith("(") and len(s) <= self.g.max_cue_length)

    def inline_dialogue(self, s: str):
        if not self.g.inline_dialogue:
            return None
        m = self.inline.match(s)
        if not m:
            return None
        name = m.group(1).strip()
        if not name or len(name.split()) > self.g.max_inline_speaker_words or not _is_caps(name):
            return None
        return name, m.group(2).strip()


def speaker_name(cue: str) -> str:
    name = _PAREN_EXT.sub(" ", cue).strip()
    return name.rstrip(":").strip()


def parse_screenplay(raw: RawScreenplay, grammar: GrammarConfig | None = None) -> ParsedScreenplay:
    """Segment ``raw`` into typed elements in document order.

    Raises :class:`EmptyInput` when every line is blank.  Malformed layout is
    never fatal: lines no rule accepts are added to ``unparsed_line_count``.
    """
    g = grammar or GrammarConfig()
    rules = _Rules(g)
    lines = [ln.expandtabs(g.tab_size).rstrip() for ln in raw.lines]
    if not any(ln.strip() for ln in lines):
        raise EmptyInput(f"{raw.movie_id}: no non-blank lines")

    elements: list[ScreenplayElement] = []
    unparsed = 0

    def emit(kind, text, first, last, speaker=None):
        elements.append(ScreenplayElement(kind, text, len(elements), (first + 1, last + 1), speaker))

    i, n = 0, len(lines)
    while i < n:
        line = lines[i]
        s = line.strip()
        if not s:
            i += 1
            continue
        ind = _indent(line)

        if rules.is_ignored(s):
            unparsed += 1
            i += 1
        elif rules.is_heading(s):
            emit(ElementKind.SHOT_HEADING, s, i, i)
            i += 1
        elif rules.is_transition(s):
            emit(ElementKind.TRANSITION, s, i, i)
            i += 1
        elif rules.is_cue(s, ind):
            i, ok = _dialogue_block(lines, i, rules, emit)
            if not ok:
                unparsed += 1
        elif ind <= g.action_max_indent and (hit := rules.inline_dialogue(s)):
            speaker, first_text = hit
            parts, j = [first_text], i + 1
            while j < n and lines[j].strip() and _indent(lines[j]) == ind and _plain(lines[j].strip(), rules):
                if rules.inline_dialogue(lines[j].strip()):
                    break
                parts.append(lines[j].strip())
                j += 1
            emit(ElementKind.DIALOGUE, " ".join(parts), i, j - 1, speaker_name(speaker))
            i = j
        elif ind <= g.action_max_indent:
            parts, j = [s], i + 1
            while j < n:
                nxt = lines[j]
                t = nxt.strip()
                if not t or _indent(nxt) > g.action_max_indent or not _plain(t, rules):
                    break
                if rules.inline_dialogue(t):
                    break
                parts.append(t)
                j += 1
            emit(ElementKind.STAGE_DIRECTION, " ".join(parts), i, j - 1)
            i = j
        else:
            unparsed += 1
            i += 1

    return ParsedScreenplay(raw.movie_id, tuple(elements), unparsed, raw.genre_tags)


def _plain(s: str, rules: _Rules) -> bool:
    return not (rules.is_heading(s) or rules.is_transition(s) or rules.is_ignored(s))


def _dialogue_block(lines, start, rules: _Rules, emit):
    """Consume a speaker cue and the speech under it.

    Returns ``(next_line, ok)``; ``ok`` is False when the cue had no speech,
    in which case only the cue line was consumed.
    """
    g = rules.g
    cue_line = lines[start]
    cue_indent = _indent(cue_line)
    speaker = speaker_name(cue_line.strip())
    speech: list[str] = []
    in_paren = False
    last = start
    j = start + 1
    while j < len(lines):
        line = lines[j]
        t = line.strip()
        if not t or _indent(line) < g.dialogue_min_indent or not _plain(t, rules):
            break
        if not in_paren and _indent(line) == cue_indent and rules.is_cue(t, cue_indent):
            break
        if in_paren or t.startswith("("):
            in_paren = not t.endswith(")")
        else:
            speech.append(t)
        last = j
        j += 1
    text = " ".join(speech).strip()
    if not text or not speaker:
        return start + 1, False
    emit(ElementKind.DIALOGUE, text, start, last, speaker)
    return last + 1, True


def extract_speech_and_directions(parsed: ParsedScreenplay):
    """Return ``(stage_directions, dialogue)`` preserving document order."""
    directions = [e for e in parsed.elements if e.kind is ElementKind.STAGE_DIRECTION]
    dialogue = [e for e in parsed.elements if e.kind is ElementKind.DIALOGUE]
    return directions, dialogue


_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    """Split on ``.``, ``!`` or ``?`` followed by whitespace.

    Abbreviations such as "Dr." are not special-cased.
    """
    return [s for s in (p.strip() for p in _SENTENCE_BREAK.split(text.strip())) if s]


def render_screenplay(elements: Sequence[ScreenplayElement], grammar: GrammarConfig | None = None,
                      width: int = 60) -> str:
    """Lay elements out in a conventional format the parser accepts."""
    g = grammar or GrammarConfig()
    cue_col = max(g.speaker_cue_column + 10, 25)
    speech_col = max(g.dialogue_min_indent, g.speaker_cue_column)
    blocks = []
    for e in elements:
        if e.kind is ElementKind.SHOT_HEADING:
            blocks.append(e.text)
        elif e.kind is ElementKind.TRANSITION:
            blocks.append(" " * 50 + e.text)
        elif e.kind is ElementKind.STAGE_DIRECTION:
            blocks.append("\n".join(textwrap.wrap(e.text, width)))
        else:
            body = textwrap.wrap(e.text, 35, initial_indent=" " * speech_col,
                                 subsequent_indent=" " * speech_col)
            blocks.append("\n".join([" " * cue_col + (e.speaker or "SOMEONE")] + body))
    return "\n\n".join(blocks) + "\n"


