#!/usr/bin/env python3
"""Regenerate the data behind every figure into one directory.

    python scripts/reproduce_figures.py --out figures/ --jobs 4

Each figure lands as <name>.csv with a <name>.csv.meta.json sidecar.
"""
import argparse
import sys
import time
from pathlib import Path

from qthermo.cli import main as cli_main
from qthermo.sweeps import FIGURES


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", nargs="+", choices=sorted(FIGURES))
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    for name in args.only or sorted(FIGURES):
        t0 = time.perf_counter()
        code = cli_main(["figure", name, "-o", str(out / f"{name}.csv"), "--jobs", str(args.jobs)])
        print(f"{name}: exit {code} in {time.perf_counter() - t0:.2f}s")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
