"""Command-line entry point.

    zfsim <experiment> [--config FILE] [--seed N] [--out DIR] [--threads N]

Experiments: ns-accuracy, snr-sweep, se-sweep, oracle. Exit codes:
0 success, 2 configuration error, 3 degenerate scenario (too many
singular realizations).
"""

import argparse
import sys
import time
from pathlib import Path

from .config import ParseError, default_config, load_config
from .experiments import RUNNERS, write_results
from .precoding import TooManySingular

_OUT_NAMES = {
    "ns-accuracy": "ns_accuracy.csv",
    "snr-sweep": "snr_sweep.csv",
    "se-sweep": "se_sweep.csv",
    "oracle": "oracle.csv",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="zfsim",
        description="Zero-forcing precoding simulation and closed-form analysis")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--out", default=".", help="output directory (default: cwd)")
        sp.add_argument("--threads", type=int, default=1,
                        help="drop-level worker threads (results identical for any count)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, experiment=args.experiment)
        else:
            cfg = default_config(args.experiment)
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.validate()
    except (ParseError, OSError) as exc:
        print(f"zfsim: config error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / _OUT_NAMES[args.experiment]

    started = time.time()
    print(f"zfsim {args.experiment}: seed={cfg.seed} drops={cfg.n_drops} "
          f"realizations/drop={cfg.n_realizations_per_drop} threads={args.threads}")
    try:
        table = RUNNERS[args.experiment](cfg, threads=args.threads, progress=print)
    except TooManySingular as exc:
        print(f"zfsim: degenerate scenario: {exc}", file=sys.stderr)
        return 3
    write_results(table, out_path)
    print(f"zfsim {args.experiment}: wrote {out_path} in {time.time() - started:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
