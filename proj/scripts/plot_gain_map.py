#!/usr/bin/env python3
"""Render a gain map produced by `jpasim gain-map`.

Usage: plot_gain_map.py out/gainmap.csv [out.png]
"""
import sys

import matplotlib.pyplot as plt
import numpy as np


def main() -> None:
    path = sys.argv[1] if len(sys.argv) > 1 else "out/gainmap.csv"
    data = np.genfromtxt(path, delimiter=",", names=True, comments="#")
    f_ratio = np.unique(data["f_ratio"])
    p_rel = np.unique(data["p_rel_db"])
    gain = np.full((p_rel.size, f_ratio.size), np.nan)
    fi = np.searchsorted(f_ratio, data["f_ratio"])
    pi = np.searchsorted(p_rel, data["p_rel_db"])
    gain[pi, fi] = data["gain_db"]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    mesh = ax.pcolormesh(f_ratio, p_rel, gain, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="direct gain (dB)")
    ax.set_xlabel("$f_p / f_c$")
    ax.set_ylabel("$P_p / P_c$ (dB)")
    ax.set_title("SQ gain map (masked cells are bistable)")
    out = sys.argv[2] if len(sys.argv) > 2 else None
    if out:
        fig.savefig(out, dpi=160, bbox_inches="tight")
    else:
        plt.show()


if __name__ == "__main__":
    main()
