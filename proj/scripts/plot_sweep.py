#!/usr/bin/env python3
"""Render output-signal phasor sweeps (ellipse/banana) from `jpasim distort`.

Usage: plot_sweep.py out/sweep_0.csv [out/sweep_1.csv ...]
"""
import sys

import matplotlib.pyplot as plt
import numpy as np


def main() -> None:
    paths = sys.argv[1:] or ["out/sweep_0.csv"]
    fig, ax = plt.subplots(figsize=(5, 5))
    for path in paths:
        data = np.genfromtxt(path, delimiter=",", names=True, comments="#")
        ax.plot(data["out_i"], data["out_q"], ".", ms=2, label=path)
    ax.set_xlabel("I")
    ax.set_ylabel("Q")
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    plt.show()


if __name__ == "__main__":
    main()
