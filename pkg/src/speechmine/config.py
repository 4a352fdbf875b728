"""Pipeline configuration: an INI file with one section per stage group."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

from .calibration import DEFAULT_BUCKETS, PRECISION_FLOOR, validate_buckets
from .classifier import TrainConfig
from .errors import ConfigError
from .screenplay import GrammarConfig


@dataclass(frozen=True)
class Paths:
    screenplay_dir: Path | None = None
    subtitle_dir: Path | None = None
    lexicon: Path | None = None
    conjugations: Path | None = None
    genres: Path | None = None
    durations: Path | None = None
    grammar: Path | None = None
    output_dir: Path = Path("speechmine-run")


@dataclass(frozen=True)
class VerbSettings:
    min_count: int = 50
    stop_top_k: int = 100


@dataclass(frozen=True)
class PairSettings:
    max_distance: int | None = None
    prefer: str = "preceding"


@dataclass(frozen=True)
class SplitSettings:
    train_count: int = 850
    seed: int = 0


@dataclass(frozen=True)
class CalibrationSettings:
    ap_cutoff: float = 0.01
    precision_floor: float = PRECISION_FLOOR
    buckets: tuple[tuple[float, float], ...] = DEFAULT_BUCKETS
    balance_target: int | None = None
    ap_method: str = "step"
    external_scores: Path | None = None


@dataclass(frozen=True)
class MiningSettings:
    clip_length: float = 10.0
    per_class_cap: int = 40000
    seed: int = 0
    external_scores: Path | None = None
    baseline_classes: str = "selected"


@dataclass(frozen=True)
class EvalSettings:
    manifest: str = "manifest"
    annotations: Path | None = None
    sample_size: int = 100
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    paths: Paths = field(default_factory=Paths)
    grammar: GrammarConfig = field(default_factory=GrammarConfig)
    verbs: VerbSettings = field(default_factory=VerbSettings)
    pairs: PairSettings = field(default_factory=PairSettings)
    split: SplitSettings = field(default_factory=SplitSettings)
    train: TrainConfig = field(default_factory=TrainConfig)
    calibration: CalibrationSettings = field(default_factory=CalibrationSettings)
    overrides: tuple[tuple[str, float], ...] = ()
    mining: MiningSettings = field(default_factory=MiningSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)

    # ---- serialisation -------------------------------------------------

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for section in ("paths", "verbs", "pairs", "split", "train", "calibration", "mining", "eval"):
            obj = getattr(self, section)
            cp[section] = {f.name: _format(getattr(obj, f.name)) for f in fields(obj)}
        cp["grammar"] = self.grammar.to_mapping()
        cp["overrides"] = {k: repr(v) for k, v in self.overrides}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str, base_dir: Path | None = None,
                  assignments: Sequence[str] = (), check_paths: bool = True) -> "PipelineConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("config", str(exc).splitlines()[0]) from None
        for item in assignments:
            key, sep, value = item.partition("=")
            section, dot, name = key.strip().partition(".")
            if not sep or not dot or not name:
                raise ConfigError(key or item, "override must look like section.key=value")
            if not cp.has_section(section):
                cp.add_section(section)
            cp[section][name] = value.strip()

        unknown = set(cp.sections()) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown section")

        kwargs = {}
        for f in fields(cls):
            if f.name in ("grammar", "overrides", "train") or not cp.has_section(f.name):
                continue
            kwargs[f.name] = _build(f.name, type(getattr(cls(), f.name)), cp[f.name], base_dir)
        if cp.has_section("train"):
            kwargs["train"] = _build("train", TrainConfig, cp["train"], base_dir)
        if cp.has_section("grammar"):
            kwargs["grammar"] = GrammarConfig.from_mapping(dict(cp["grammar"]))
        if cp.has_section("overrides"):
            ov = []
            for k, v in cp["overrides"].items():
                try:
                    ov.append((k, float(v)))
                except ValueError:
                    raise ConfigError(f"overrides.{k}", f"not a number: {v!r}") from None
            kwargs["overrides"] = tuple(sorted(ov))

        cfg = cls(**kwargs)
        if cfg.paths.grammar is not None and not cp.has_section("grammar"):
            cfg = replace(cfg, grammar=GrammarConfig.load(_existing(cfg.paths.grammar, "paths.grammar")))
        cfg.validate(check_paths)
        return cfg

    @classmethod
    def load(cls, path, assignments: Sequence[str] = (), check_paths: bool = True) -> "PipelineConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError("config", f"no such file: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"), path.resolve().parent, assignments, check_paths)

    def validate(self, check_paths: bool = True) -> None:
        c = self.calibration
        if not 0 <= c.ap_cutoff <= 1:
            raise ConfigError("calibration.ap_cutoff", "must be within [0, 1]")
        if not 0 < c.precision_floor <= 1:
            raise ConfigError("calibration.precision_floor", "must be within (0, 1]")
        if c.ap_method not in ("step", "11point"):
            raise ConfigError("calibration.ap_method", "must be 'step' or '11point'")
        validate_buckets(c.buckets, c.precision_floor)
        if self.verbs.min_count < 1:
            raise ConfigError("verbs.min_count", "must be >= 1")
        if self.verbs.stop_top_k < 0:
            raise ConfigError("verbs.stop_top_k", "must be >= 0")
        if self.split.train_count < 0:
            raise ConfigError("split.train_count", "must be >= 0")
        if self.pairs.prefer not in ("preceding", "following"):
            raise ConfigError("pairs.prefer", "must be 'preceding' or 'following'")
        if self.pairs.max_distance is not None and self.pairs.max_distance < 0:
            raise ConfigError("pairs.max_distance", "must be >= 0")
        if self.mining.clip_length <= 0:
            raise ConfigError("mining.clip_length", "must be positive")
        if self.mining.per_class_cap < 1:
            raise ConfigError("mining.per_class_cap", "must be >= 1")
        if self.mining.baseline_classes not in ("selected", "all"):
            raise ConfigError("mining.baseline_classes", "must be 'selected' or 'all'")
        if self.eval.manifest not in ("manifest", "manifest_baseline"):
            raise ConfigError("eval.manifest", "must be 'manifest' or 'manifest_baseline'")
        if self.eval.sample_size < 1:
            raise ConfigError("eval.sample_size", "must be >= 1")
        for k, v in self.overrides:
            if not 0 <= v <= 1:
                raise ConfigError(f"overrides.{k}", "threshold must be within [0, 1]")
        if check_paths:
            for f in fields(self.paths):
                value = getattr(self.paths, f.name)
                if f.name != "output_dir" and value is not None:
                    _existing(value, f"paths.{f.name}")
            for name, value in (("calibration.external_scores", c.external_scores),
                                ("mining.external_scores", self.mining.external_scores),
                                ("eval.annotations", self.eval.annotations)):
                if value is not None:
                    _existing(value, name)


def _existing(path: Path, name: str) -> Path:
    if not Path(path).exists():
        raise ConfigError(name, f"no such file or directory: {path}")
    return Path(path)


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(f"{lo!r}-{hi!r}" for lo, hi in value)
    return str(value)


_PATH_FIELDS = {"screenplay_dir", "subtitle_dir", "lexicon", "conjugations", "genres", "durations",
                "grammar", "output_dir", "external_scores", "annotations"}


def _build(section: str, cls, values, base_dir: Path | None):
    known = {f.name: f for f in fields(cls)}
    defaults = cls()
    kwargs = {}
    for key, raw in values.items():
        if key not in known:
            raise ConfigError(f"{section}.{key}", "unknown key")
        raw = raw.strip()
        default = getattr(defaults, key)
        try:
            if key in _PATH_FIELDS:
                if not raw:
                    if key == "output_dir":
                        raise ValueError
                    kwargs[key] = None
                else:
                    p = Path(raw).expanduser()
                    kwargs[key] = p if p.is_absolute() or base_dir is None else (base_dir / p).resolve()
            elif key == "buckets":
                kwargs[key] = _parse_buckets(raw)
            elif key in ("balance_target", "max_distance"):
                kwargs[key] = int(raw) if raw else None
            elif isinstance(default, bool):
                kwargs[key] = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int):
                kwargs[key] = int(raw)
            elif isinstance(default, float):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = raw
        except ValueError:
            raise ConfigError(f"{section}.{key}", f"cannot parse {raw!r}") from None
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(section, str(exc)) from None


def _parse_buckets(raw: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in raw.split(","):
        lo, sep, hi = item.strip().partition("-")
        if not sep:
            raise ValueError(item)
        out.append((float(lo), float(hi)))
    return tuple(out)
