"""Run the desk-scale profiles (Branin, Styblinski-Tang, Rosenbrock/BOI) and write CSV + SVG.

Usage: python3 scripts/run_desk.py [--parallel N] [--out DIR]
"""

import argparse
import sys
from pathlib import Path

from eiregret.bench.cli import cli

CONFIGS = ["desk_branin.toml", "desk_styblinski.toml", "desk_rosenbrock_boi.toml"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()
    root = Path(__file__).resolve().parent.parent / "configs"
    for name in CONFIGS:
        argv = ["run", "--config", str(root / name), "--parallel", str(args.parallel)]
        if args.out is not None:
            argv += ["--out", str(args.out / Path(name).stem)]
        code = cli(argv)
        if code:
            sys.exit(code)


if __name__ == "__main__":
    main()
