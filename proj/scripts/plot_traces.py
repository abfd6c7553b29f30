#!/usr/bin/env python3
"""Plot a trace CSV written by `mjls simulate --out`: x_j between x_minus_j and x_plus_j."""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {key: [float(r[key]) for r in rows] for key in rows[0]}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv")
    parser.add_argument("-o", "--output", default="traces.png")
    args = parser.parse_args()

    data = load(args.csv)
    n = sum(1 for key in data if key.startswith("x") and key[1:].isdigit())
    fig, axes = plt.subplots(n + 1, 1, sharex=True, figsize=(8, 2.2 * (n + 1)), squeeze=False)
    t = data["t"]
    for j in range(1, n + 1):
        ax = axes[j - 1][0]
        ax.fill_between(t, data[f"x_minus{j}"], data[f"x_plus{j}"], alpha=0.3, label="enclosure")
        ax.plot(t, data[f"x{j}"], color="black", linewidth=1, label=f"x{j}")
        ax.legend(loc="upper right")
    axes[n][0].step(t, data["mode"], where="post")
    axes[n][0].set_ylabel("mode")
    axes[n][0].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
