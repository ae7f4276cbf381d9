"""CLI: render figures from diagnostics CSVs selected by a glob pattern."""

import argparse
import glob as globlib
import sys

from . import panels


def main(argv=None):
    parser = argparse.ArgumentParser(prog="normdescent-plot")
    parser.add_argument("--glob", required=True, help="pattern selecting run CSVs")
    parser.add_argument("--out", required=True, help="output directory for images")
    parser.add_argument("--panel", action="append", choices=panels.PANELS,
                        help="panel to render (repeatable; default: all)")
    parser.add_argument("--margin", choices=["hard", "soft"], default="hard")
    parser.add_argument("--format", action="append", choices=["png", "svg"],
                        help="image format (repeatable; default: png and svg)")
    args = parser.parse_args(argv)

    paths = sorted(globlib.glob(args.glob, recursive=True))
    if not paths:
        parser.error(f"no files match {args.glob!r}")
    job = panels.PlotJob(
        csv_paths=tuple(paths),
        out_dir=args.out,
        panels=tuple(args.panel) if args.panel else panels.PANELS,
        margin_kind=args.margin,
        formats=tuple(args.format) if args.format else ("png", "svg"),
    )
    for path in panels.render(job):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
