"""Command line entry point: render one figure from solver CSV outputs.

Exit codes: 0 rendered, 1 input data malformed, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, InputFormatError, make_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpme-figures",
        description="Render diagnostic figures from solver CSV outputs.",
    )
    parser.add_argument(
        "--input", action="append", required=True, metavar="CSV",
        help="input table; repeat for figures that overlay several runs",
    )
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--output", required=True, metavar="IMAGE")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(inputs=tuple(args.input), kind=args.kind, output=args.output)
        annotations = make_figure(spec)
    except (InputFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.output}")
    for key in sorted(annotations):
        value = annotations[key]
        if isinstance(value, float):
            print(f"  {key} = {value:.6g}")
        else:
            print(f"  {key} = {value}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
