"""Command-line entry point: one subcommand per pipeline stage."""

from __future__ import annotations

import argparse
import logging
import shutil
import sys
import warnings
from importlib import resources
from pathlib import Path

from .config import PipelineConfig
from .errors import ConfigError, DataError, MissingArtifact
from .pipeline import STAGES, export_sentences, run_stage

EXIT_OK, EXIT_CONFIG, EXIT_MISSING, EXIT_DATA = 0, 2, 3, 4

log = logging.getLogger("speechmine")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", required=True, help="pipeline config file (INI)")
    p.add_argument("--set", dest="assignments", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override a config field; repeatable")
    p.add_argument("-o", "--output-dir", help="run directory (overrides paths.output_dir)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="speechmine", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES:
        _add_common(sub.add_parser(stage, help=f"run the {stage} stage"))
    allp = sub.add_parser("all", help="parse, mine-verbs, build-pairs, train, calibrate, mine-clips")
    _add_common(allp)
    exp = sub.add_parser("export-sentences", help="write caption sentences with ids for an external scorer")
    _add_common(exp)
    exp.add_argument("out", help="output TSV path")
    demo = sub.add_parser("demo", help="copy the bundled mini-corpus and a matching config into a directory")
    demo.add_argument("directory")
    return parser


def _load(args) -> PipelineConfig:
    assignments = list(args.assignments)
    if args.output_dir:
        assignments.append(f"paths.output_dir={Path(args.output_dir).resolve()}")
    return PipelineConfig.load(args.config, assignments)


def write_demo(directory) -> Path:
    """Copy the bundled corpus to ``directory`` and write ``demo.cfg`` next to it."""
    directory = Path(directory)
    src = resources.files("speechmine").joinpath("data", "minicorpus")
    with resources.as_file(src) as corpus:
        shutil.copytree(corpus, directory, dirs_exist_ok=True)
    return directory / "demo.cfg"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    warnings.formatwarning = lambda msg, cat, *_args, **_kw: f"{cat.__name__}: {msg}"
    try:
        if args.command == "demo":
            print(write_demo(args.directory))
            return EXIT_OK
        cfg = _load(args)
        if args.command == "export-sentences":
            print(export_sentences(cfg, args.out))
        elif args.command == "all":
            for stage in ("parse", "mine-verbs", "build-pairs", "train", "calibrate", "mine-clips"):
                log.info("stage %s", stage)
                run_stage(stage, cfg)
        else:
            run_stage(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifact as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
