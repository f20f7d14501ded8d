"""Command-line entry point: one subcommand per pipeline stage."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import parse_config
from .errors import BookscoreError
from .pipeline import STAGES, Pipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bookscore",
        description="Build a chapter-by-chapter book soundtrack from a movie "
        "adaptation's album.",
    )
    sub = parser.add_subparsers(dest="stage", required=True)
    for stage in STAGES + ["all"]:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--seed", type=int, help="override weave.seed")
        p.add_argument(
            "--log-import",
            metavar="TSV",
            help="use a pre-made track log instead of scanning the movie audio",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides: dict[str, str] = {}
        if args.out:
            overrides["output_dir"] = args.out
        if args.seed is not None:
            overrides["weave.seed"] = str(args.seed)
        cfg = parse_config(args.config, overrides)
        pipeline = Pipeline(cfg)
        if args.log_import:
            pipeline.log_import = Path(args.log_import)
        pipeline.run(args.stage)
    except BookscoreError as exc:
        json.dump(
            {"error": type(exc).__name__, "message": str(exc)},
            sys.stderr,
        )
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
