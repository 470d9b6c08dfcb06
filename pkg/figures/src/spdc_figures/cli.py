"""Command-line front end: ``spdc-figures render --kind ... --in ... --out ...``."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureJob, SchemaError, render

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdc-figures",
        description="Render figures from solver CSV artifacts.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from CSV input(s)")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="inputs", required=True,
                   help="comma-separated CSV path(s)")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--labels", default="",
                   help="comma-separated series names (sweep kinds only)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    inputs = tuple(s for s in args.inputs.split(",") if s)
    labels = tuple(s for s in args.labels.split(",") if s)
    try:
        job = FigureJob(kind=args.kind, inputs=inputs, output=args.out,
                        labels=labels)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        path = render(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
