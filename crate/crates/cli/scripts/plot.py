#!/usr/bin/env python3
"""Plot a phidro CSV file: first column on x, every other numeric column on y.

    python3 plot.py density.csv density.png [--logy]
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], [r for r in rows[1:] if r]
    columns = {}
    for j, name in enumerate(header):
        try:
            columns[name] = [float(r[j]) if r[j] else float("nan") for r in body]
        except ValueError:
            continue
    return header, columns


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("png")
    ap.add_argument("--logy", action="store_true")
    args = ap.parse_args()

    header, columns = read(args.csv)
    x_name = header[0]
    if x_name not in columns:
        raise SystemExit(f"first column `{x_name}` is not numeric")
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in header[1:]:
        if name in columns:
            ax.plot(columns[x_name], columns[name], label=name, lw=1)
    ax.set_xlabel(x_name)
    if args.logy:
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.png, dpi=120)


if __name__ == "__main__":
    main()
