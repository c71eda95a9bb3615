#!/usr/bin/env python3
"""Solve every catalog problem in both modes and write the CLI outputs under one directory."""

import argparse
import logging
from pathlib import Path

from inexact_slp.cli import RunConfig, run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("runs"))
    parser.add_argument("--trace", choices=("none", "iter", "pivot"), default="iter")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    for mode in ("inexact", "exact"):
        run(RunConfig(problem="all", mode=mode, out_dir=args.out_dir, trace=args.trace))
        print((args.out_dir / f"aggregate_{mode}.txt").read_text())


if __name__ == "__main__":
    main()
