#!/usr/bin/env python3
"""Plot the CSVs written by reproduce_figures.py (needs matplotlib).

    python scripts/plot_figures.py figures/

Every column after the first is drawn against the first; fig4 is a
(T1, T2) grid and is drawn as a heat map of its first data column.
"""
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return header, np.array([[float(x) for x in r] for r in body])


def plot_lines(header, data, ax):
    x = data[:, 0]
    for j, name in enumerate(header[1:], start=1):
        y = data[:, j]
        ok = np.isfinite(y)
        ax.plot(x[ok], y[ok], label=name)
    ax.set_xlabel(header[0])
    ax.legend(fontsize=7)


def plot_grid(header, data, ax):
    t1 = np.unique(data[:, 0])
    t2 = np.unique(data[:, 1])
    z = data[:, 2].reshape(len(t1), len(t2))
    im = ax.pcolormesh(t2, t1, z, shading="auto")
    ax.set_xlabel(header[1])
    ax.set_ylabel(header[0])
    plt.colorbar(im, ax=ax, label=header[2])


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    src = Path(argv[0] if argv else "figures")
    for path in sorted(src.glob("fig*.csv")):
        header, data = read(path)
        fig, ax = plt.subplots(figsize=(5, 3.6))
        if header[:2] == ["t1", "t2"]:
            plot_grid(header, data, ax)
        else:
            plot_lines(header, data, ax)
        ax.set_title(path.stem)
        fig.tight_layout()
        target = path.with_suffix(".png")
        fig.savefig(target, dpi=130)
        plt.close(fig)
        print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
