#!/usr/bin/env python3
"""Generate the demo corpus and run the full pipeline.

Writes build/minicorpus/corpus (inputs) and build/minicorpus/out
(artifacts + reader bundle); prints the bundle path. Used by the
frontend test suite and handy for manual runs.
"""

import argparse
from pathlib import Path

from bookscore.config import parse_config
from bookscore.minicorpus import generate
from bookscore.pipeline import Pipeline


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--dest", default=None, help="default: <repo>/build/minicorpus")
    parser.add_argument(
        "--if-missing", action="store_true",
        help="skip the run when the bundle already exists",
    )
    args = parser.parse_args()

    repo = Path(__file__).resolve().parent.parent
    dest = Path(args.dest) if args.dest else repo / "build/minicorpus"
    out = dest / "out"
    bundle = out / "bundle"
    if args.if_missing and (bundle / "manifest.json").exists():
        print(bundle)
        return 0

    config = generate(dest / "corpus")
    cfg = parse_config(config, {"output_dir": str(out)})
    Pipeline(cfg).run("all")
    print(bundle)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
