"""Verb candidates from stage directions: tokenising, PoS lookup, conjugation grouping."""

from __future__ import annotations

import json
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import AmbiguousForm, ConjugationTableError, EmptyCorpus, MalformedRow

# Apostrophes are kept inside tokens, so they are not part of the split set.
PUNCTUATION = frozenset((set(string.punctuation) - {"'"}) | set("“”„«»‚—–…¡¿•·"))
_SPLIT = re.compile("[" + re.escape("".join(sorted(PUNCTUATION))) + r"\s]+")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "`": "'", "´": "'"})

VERB_TAGS = frozenset({"VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "VERB"})


def tokenize(sentence: str) -> list[str]:
    """Lowercase word tokens with punctuation removed; inner apostrophes survive.

    >>> tokenize("Andrew walked over!")
    ['andrew', 'walked', 'over']
    >>> tokenize("it's me.")
    ["it's", 'me']
    """
    out = []
    for piece in _SPLIT.split(sentence.translate(_APOSTROPHES).lower()):
        tok = piece.strip("'")
        if tok:
            out.append(tok)
    return out


@dataclass
class PosLexicon:
    entries: dict[str, frozenset[str]] = field(default_factory=dict)

    def tags(self, word: str) -> frozenset[str]:
        return self.entries.get(word, frozenset())

    def is_verb(self, word: str) -> bool:
        return bool(self.tags(word) & VERB_TAGS)

    @classmethod
    def parse(cls, text: str) -> "PosLexicon":
        entries: dict[str, frozenset[str]] = {}
        for line_no, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2 or not parts[0].strip():
                raise MalformedRow(line_no, "expected word<TAB>TAG1,TAG2")
            word = parts[0].strip().lower()
            if word != "".join(tokenize(word)):
                raise MalformedRow(line_no, f"lexicon key {word!r} is not a clean token")
            tags = frozenset(t.strip() for t in parts[1].split(",") if t.strip())
            entries[word] = entries.get(word, frozenset()) | tags
        return cls(entries)

    @classmethod
    def load(cls, path) -> "PosLexicon":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "PosLexicon":
        return cls.parse(_data_text("lexicon.tsv"))

    def dumps(self) -> str:
        return "".join(f"{w}\t{','.join(sorted(t))}\n" for w, t in sorted(self.entries.items()))


# --- regular inflection ----------------------------------------------------

_VOWELS = set("aeiou")


def _single_cvc(stem: str) -> bool:
    if len(stem) < 3:
        return False
    a, b, c = stem[-3:]
    vowel_groups = len(re.findall(r"[aeiou]+", stem))
    return (a not in _VOWELS and b in _VOWELS and c not in _VOWELS
            and c not in "wxy" and vowel_groups == 1)


def third_person(stem: str) -> str:
    if stem.endswith(("s", "x", "z", "ch", "sh", "o")):
        return stem + "es"
    if len(stem) > 1 and stem.endswith("y") and stem[-2] not in _VOWELS:
        return stem[:-1] + "ies"
    return stem + "s"


def past_tense(stem: str) -> str:
    if stem.endswith("e"):
        return stem + "d"
    if len(stem) > 1 and stem.endswith("y") and stem[-2] not in _VOWELS:
        return stem[:-1] + "ied"
    if _single_cvc(stem):
        return stem + stem[-1] + "ed"
    return stem + "ed"


def gerund(stem: str) -> str:
    if stem.endswith("ie"):
        return stem[:-2] + "ying"
    if stem.endswith("e") and not stem.endswith(("ee", "ye", "oe")) and len(stem) > 2:
        return stem[:-1] + "ing"
    if _single_cvc(stem):
        return stem + stem[-1] + "ing"
    return stem + "ing"


def regular_forms(stem: str) -> set[str]:
    """Base, -s, -ed and -ing forms with consonant doubling and e-drop."""
    return {stem, third_person(stem), past_tense(stem), gerund(stem)}


@dataclass
class ConjugationTable:
    """Verb stem to every surface form.

    Forms shared by several stems must be flagged ambiguous (a trailing
    ``*`` in the table file).
    """

    entries: dict[str, frozenset[str]] = field(default_factory=dict)
    ambiguous: frozenset[str] = frozenset()

    def __post_init__(self):
        self._index: dict[str, tuple[str, ...]] = {}
        self._reindex()

    def _reindex(self) -> None:
        owners: dict[str, list[str]] = {}
        for stem, forms in self.entries.items():
            if stem not in forms:
                raise ConjugationTableError(f"stem {stem!r} missing from its own form set")
            for f in forms:
                owners.setdefault(f, []).append(stem)
        for form, stems in owners.items():
            if len(stems) > 1 and form not in self.ambiguous:
                raise ConjugationTableError(
                    f"form {form!r} shared by {sorted(stems)} but not flagged ambiguous")
        self._index = {f: tuple(sorted(s)) for f, s in owners.items()}

    def stems_for(self, form: str) -> tuple[str, ...]:
        return self._index.get(form, ())

    def forms(self, stem: str) -> frozenset[str]:
        return self.entries.get(stem, frozenset())

    def __contains__(self, stem: str) -> bool:
        return stem in self.entries

    def extend_regular(self, stems: Iterable[str]) -> "ConjugationTable":
        """Return a copy with regular forms for stems not yet in the table.

        Generated forms already owned by another stem are skipped, so no new
        ambiguity is introduced.  A stem that is itself a form of another
        stem ("saw") is left alone.
        """
        entries = dict(self.entries)
        owned = set(self._index)
        for stem in stems:
            if stem in entries or stem in owned:
                continue
            forms = {f for f in regular_forms(stem) if f not in owned} | {stem}
            entries[stem] = frozenset(forms)
            owned |= forms
        return ConjugationTable(entries, self.ambiguous)

    @classmethod
    def parse(cls, text: str) -> "ConjugationTable":
        entries: dict[str, frozenset[str]] = {}
        ambiguous: set[str] = set()
        for line_no, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip():
                raise MalformedRow(line_no, "expected stem<TAB>form1,form2,...")
            stem = parts[0].strip().lower()
            forms = set()
            for raw in parts[1].split(","):
                f = raw.strip().lower()
                if not f:
                    continue
                if f.endswith("*"):
                    f = f[:-1]
                    ambiguous.add(f)
                forms.add(f)
            forms.add(stem)
            entries[stem] = entries.get(stem, frozenset()) | frozenset(forms)
        return cls(entries, frozenset(ambiguous))

    @classmethod
    def load(cls, path) -> "ConjugationTable":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "ConjugationTable":
        return cls.parse(_data_text("conjugations.tsv"))

    def dumps(self) -> str:
        lines = []
        for stem in sorted(self.entries):
            forms = sorted(self.entries[stem] - {stem})
            lines.append(stem + "\t" + ",".join(f + "*" if f in self.ambiguous else f for f in forms))
        return "\n".join(lines) + "\n"


def stem_of(token: str, conj: ConjugationTable, frequencies: Mapping[str, int] | None = None,
            tie_break: str | None = "frequency") -> str | None:
    """Stem owning ``token``, or None.

    A form listed under several stems goes to the stem with the higher
    ``frequencies`` entry, then the alphabetically first.  With
    ``tie_break=None`` such forms raise :class:`AmbiguousForm`.
    """
    stems = conj.stems_for(token)
    if not stems:
        return None
    if len(stems) == 1:
        return stems[0]
    if tie_break is None:
        raise AmbiguousForm(token, stems)
    freq = frequencies or {}
    return min(stems, key=lambda s: (-freq.get(s, 0), s))


@dataclass(frozen=True)
class VerbClass:
    stem: str
    forms: frozenset[str]
    corpus_frequency: int
    ambiguous_forms: frozenset[str] = frozenset()

    def to_json(self) -> str:
        d = {"stem": self.stem, "forms": sorted(self.forms), "corpus_frequency": self.corpus_frequency}
        if self.ambiguous_forms:
            d["ambiguous_forms"] = sorted(self.ambiguous_forms)
        return json.dumps(d)

    @classmethod
    def from_dict(cls, d: Mapping) -> "VerbClass":
        return cls(d["stem"], frozenset(d["forms"]), int(d["corpus_frequency"]),
                   frozenset(d.get("ambiguous_forms", ())))


@dataclass
class VerbMiningReport:
    """Everything counted during mining, kept for the conservation check."""

    kept: list[VerbClass]
    stop_removed: list[VerbClass]
    rare_removed: list[VerbClass]
    total_verb_tokens: int


def count_verb_stems(texts: Iterable[str], lexicon: PosLexicon, conj: ConjugationTable):
    """Count verb-token occurrences grouped by stem.

    Returns ``(stem_counts, form_counts, ambiguous_resolved)``.  Verb tokens
    missing from the conjugation table form their own stem.
    """
    form_counts: Counter[str] = Counter()
    for text in texts:
        for tok in tokenize(text):
            if lexicon.is_verb(tok):
                form_counts[tok] += 1

    # Prior frequencies from unambiguous forms drive the tie-break.
    prior: Counter[str] = Counter()
    for form, c in form_counts.items():
        owners = conj.stems_for(form)
        if len(owners) == 1:
            prior[owners[0]] += c
        elif not owners:
            prior[form] += c

    stem_counts: Counter[str] = Counter()
    resolved: dict[str, set[str]] = {}
    for form in sorted(form_counts):
        stem = stem_of(form, conj, prior) or form
        stem_counts[stem] += form_counts[form]
        if len(conj.stems_for(form)) > 1:
            resolved.setdefault(stem, set()).add(form)
    return stem_counts, form_counts, resolved


def mine_verb_classes(directions, lexicon: PosLexicon, conj: ConjugationTable,
                      min_count: int = 50, stop_top_k: int = 100,
                      report: bool = False):
    """Frequent-but-not-too-frequent verb classes from stage directions.

    ``directions`` holds stage-direction elements (or plain strings).  Stems
    are ranked by grouped frequency; the ``stop_top_k`` most frequent are
    dropped as stop verbs, then anything below ``min_count``.  Result is
    sorted by descending frequency, ties alphabetical.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if stop_top_k < 0:
        raise ValueError("stop_top_k must be >= 0")
    texts = [d if isinstance(d, str) else d.text for d in directions]
    if not texts:
        raise EmptyCorpus("no stage directions to mine")

    stem_counts, _, resolved = count_verb_stems(texts, lexicon, conj)
    ranked = sorted(stem_counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def make(stem, count):
        forms = conj.forms(stem) or frozenset({stem})
        return VerbClass(stem, forms, count, frozenset(resolved.get(stem, ())))

    stop = [make(s, c) for s, c in ranked[:stop_top_k]]
    rest = ranked[stop_top_k:]
    kept = [make(s, c) for s, c in rest if c >= min_count]
    rare = [make(s, c) for s, c in rest if c < min_count]
    if report:
        return VerbMiningReport(kept, stop, rare, sum(stem_counts.values()))
    return kept


def write_verb_classes(classes: Sequence[VerbClass], path) -> None:
    Path(path).write_text("".join(vc.to_json() + "\n" for vc in classes), encoding="utf-8")


def read_verb_classes(path) -> list[VerbClass]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [VerbClass.from_dict(json.loads(line)) for line in lines if line.strip()]


def _data_text(name: str) -> str:
    return resources.files("speechmine").joinpath("data", name).read_text(encoding="utf-8")
