"""Command line: levyheat-plot <kind> --in a.csv [--ref b.csv] --out fig.svg"""

from __future__ import annotations

import argparse
import sys

from .render import PLOT_KINDS, PlotSpec, SchemaError, render


def build_parser():
    ap = argparse.ArgumentParser(
        prog="levyheat-plot",
        description="Render figures from levyheat CSV artifacts.")
    ap.add_argument("kind", choices=PLOT_KINDS)
    ap.add_argument("--in", dest="inputs", required=True, action="append",
                    help="input CSV (repeatable)")
    ap.add_argument("--ref", default=None,
                    help="reference tail-curve CSV (tail-ratio only)")
    ap.add_argument("--ref-level", type=float, default=1.0,
                    help="horizontal reference line for tail-ratio")
    ap.add_argument("--normalize", action="store_true",
                    help="divide growth-envelope series by f(r)")
    ap.add_argument("--out", required=True, help="output SVG or PNG path")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = PlotSpec(kind=args.kind, inputs=tuple(args.inputs),
                    output=args.out, reference=args.ref,
                    normalize=args.normalize, reference_level=args.ref_level)
    try:
        render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
