"""Command line: figure <id> --in CSV [--in CSV2] --out PATH."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_IDS, FigureJob, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sptfigure",
        description="Render figures from sptgame CSV sweep datasets",
    )
    parser.add_argument("figure_id", choices=FIGURE_IDS, metavar="id",
                        help=f"one of {', '.join(FIGURE_IDS)}")
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV, repeatable")
    parser.add_argument("--out", required=True, metavar="PATH",
                        help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        summary = render(FigureJob(args.figure_id, tuple(args.inputs), args.out))
    except SchemaError as exc:
        print(f"invalid figure job: {exc}", file=sys.stderr)
        return 2
    for note in summary.notes:
        print(f"note: {note}", file=sys.stderr)
    print(summary.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
