"""Exception and warning types shared across the pipeline."""

from __future__ import annotations


class SpeechMineError(Exception):
    """Base class for all pipeline errors."""


class DataError(SpeechMineError, ValueError):
    """Input data cannot be processed. Maps to CLI exit code 4."""


class EmptyInput(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class AmbiguousForm(DataError):
    def __init__(self, form: str, stems):
        self.form = form
        self.stems = sorted(stems)
        super().__init__(f"form {form!r} belongs to several stems: {', '.join(self.stems)}")


class ConjugationTableError(DataError):
    pass


class NoDialogue(DataError):
    pass


class InsufficientMovies(DataError):
    pass


class EmptyTraining(DataError):
    pass


class MalformedRow(DataError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class UnknownClass(DataError):
    def __init__(self, name: str, line_no: int | None = None):
        self.name = name
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(f"unknown class {name!r}{where}")


class NoPositives(DataError):
    pass


class NoValidCues(DataError):
    pass


class IncompleteAnnotations(DataError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        preview = ", ".join(str(m) for m in self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" (+{len(self.missing) - 10} more)"
        super().__init__(f"{len(self.missing)} sampled rows lack annotations: {preview}{more}")


class MissingArtifact(SpeechMineError):
    """An upstream stage output is absent. Maps to CLI exit code 3."""

    def __init__(self, name: str, path=None):
        self.name = name
        self.path = path
        super().__init__(name if path is None else f"{name} ({path})")


class ConfigError(SpeechMineError):
    """Invalid configuration value. Maps to CLI exit code 2."""

    def __init__(self, field: str, reason: str):
        self.field = field
        super().__init__(f"{field}: {reason}")


class DegenerateClasses(UserWarning):
    """Some classes have no training pairs; they keep prior-only behaviour."""


class NoAdmissibleThreshold(UserWarning):
    """A class never reaches the precision floor and is dropped."""


class RenormalizedScores(UserWarning):
    pass


class SmallValidationSet(UserWarning):
    pass
