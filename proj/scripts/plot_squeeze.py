#!/usr/bin/env python3
"""Render S(theta) from `jpasim squeeze` output.

Usage: plot_squeeze.py out/squeeze_theta.csv [out.png]
"""
import sys

import matplotlib.pyplot as plt
import numpy as np


def main() -> None:
    path = sys.argv[1] if len(sys.argv) > 1 else "out/squeeze_theta.csv"
    data = np.genfromtxt(path, delimiter=",", names=True, comments="#")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(data["theta_rad"], data["s_db"], yerr=3 * data["stderr_db"],
                fmt="o-", ms=3, lw=1, capsize=2)
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xlabel(r"$\theta$ (rad)")
    ax.set_ylabel(r"$S = \sigma^2_{on}/\sigma^2_{off}$ (dB)")
    ax.set_xticks([0, np.pi / 2, np.pi, 3 * np.pi / 2, 2 * np.pi])
    ax.set_xticklabels(["0", r"$\pi/2$", r"$\pi$", r"$3\pi/2$", r"$2\pi$"])
    out = sys.argv[2] if len(sys.argv) > 2 else None
    if out:
        fig.savefig(out, dpi=160, bbox_inches="tight")
    else:
        plt.show()


if __name__ == "__main__":
    main()
