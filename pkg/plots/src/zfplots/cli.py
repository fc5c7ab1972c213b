"""Figure-rendering command line.

    zfsim-plots <figure_kind> --in results.csv --out figure.png

figure_kind: cdf | snr-sweep | se-sweep. Exit codes: 0 success,
2 schema mismatch or unreadable input.
"""

import argparse
import sys

from .csvio import SchemaMismatch
from .render import FigureSpec, render

_KINDS = {"cdf": "cdf", "snr-sweep": "snr_sweep", "se-sweep": "se_sweep"}


def build_parser():
    parser = argparse.ArgumentParser(prog="zfsim-plots",
                                     description="Render zfsim result CSVs")
    parser.add_argument("figure_kind", choices=sorted(_KINDS))
    parser.add_argument("--in", dest="input_csv", required=True,
                        help="result CSV written by zfsim")
    parser.add_argument("--out", dest="output", required=True,
                        help="output image path (extension picks the format)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_csv=args.input_csv,
                      figure_kind=_KINDS[args.figure_kind],
                      output=args.output)
    try:
        render(spec)
    except (SchemaMismatch, OSError) as exc:
        print(f"zfsim-plots: {exc}", file=sys.stderr)
        return 2
    print(f"zfsim-plots: wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
