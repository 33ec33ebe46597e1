"""Command line entry point: render one figure from one CSV."""

from __future__ import annotations

import argparse
import sys

from .exceptions import FigsError, InvalidStyleError
from .render import FigureJob, FigureKind, render


def _parse_style(items):
    style = {}
    for item in items:
        if "=" not in item:
            raise InvalidStyleError(
                f"style entry {item!r} is not KEY=VALUE"
            )
        key, _, value = item.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "log_y":
            style[key] = value.lower() in ("1", "true", "yes")
        else:
            style[key] = value
    return style


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delayfigs",
        description="Render delay-matrix sweep CSVs to figures.",
    )
    parser.add_argument("--version", action="version", version="0.1.0")
    parser.add_argument("--csv", required=True,
                        help="input CSV produced by the delaylab CLI")
    parser.add_argument("--kind", required=True,
                        choices=[k.value for k in FigureKind],
                        help="figure family matching the CSV's experiment")
    parser.add_argument("--out", required=True,
                        help="output image path (.svg is reproducible)")
    parser.add_argument("--style", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="style override, repeatable "
                             "(title, cmap, colorbar_label, log_y)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = FigureJob(
            csv_path=args.csv,
            figure_kind=args.kind,
            out_path=args.out,
            style=_parse_style(args.style),
        )
        render(job)
    except (FigsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
