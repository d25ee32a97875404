"""Figure rendering for completed runs.

Reads the VTK rounds and the CSV history back from a run directory and
renders per-round design/mesh/indicator maps plus convergence curves into
<out_dir>/figures/*.png.  Red is material, blue is void.
"""

import csv
import glob
import os
import re

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

from .vtkio import read_vtk


def _round_files(out_dir):
    files = glob.glob(os.path.join(out_dir, "round_*.vtk"))
    keyed = [(int(re.search(r"round_(\d+)\.vtk$", f).group(1)), f) for f in files]
    return sorted(keyed)


def render_round(vtk_path, fig_dir, k):
    data = read_vtk(vtk_path)
    tri = mtri.Triangulation(data["points"][:, 0], data["points"][:, 1], data["cells"])
    made = []

    def save(fig, name):
        path = os.path.join(fig_dir, name)
        fig.savefig(path, dpi=150, bbox_inches="tight")
        plt.close(fig)
        made.append(path)

    if "rho" in data["point_data"]:
        fig, ax = plt.subplots(figsize=(6, 3.2))
        tpc = ax.tripcolor(tri, data["point_data"]["rho"], shading="gouraud",
                           cmap="RdBu_r", vmin=0.0, vmax=1.0)
        fig.colorbar(tpc, ax=ax, shrink=0.85)
        ax.set_aspect("equal")
        ax.set_title(f"design, round {k}")
        save(fig, f"design_{k}.png")

    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.triplot(tri, linewidth=0.25, color="0.3")
    ax.set_aspect("equal")
    ax.set_title(f"mesh, round {k} ({data['points'].shape[0]} vertices)")
    save(fig, f"mesh_{k}.png")

    for name, label in (("eta1_sq", "optimality indicator"),
                        ("eta2_sq", "state indicator")):
        if name in data["cell_data"]:
            fig, ax = plt.subplots(figsize=(6, 3.2))
            vals = data["cell_data"][name]
            tpc = ax.tripcolor(tri, facecolors=vals, cmap="viridis")
            fig.colorbar(tpc, ax=ax, shrink=0.85)
            ax.set_aspect("equal")
            ax.set_title(f"{label} (squared), round {k}")
            save(fig, f"{name}_{k}.png")
    return made


def render_history(csv_path, fig_dir):
    rows = []
    with open(csv_path) as fh:
        for row in csv.DictReader(fh):
            rows.append(row)
    if not rows:
        return []
    J = np.array([float(r["objective"]) for r in rows])
    G = np.array([float(r["volume_gap"]) for r in rows])
    rounds = np.array([int(r["round"]) for r in rows])
    it = np.arange(len(rows))
    boundaries = it[np.r_[False, np.diff(rounds) > 0]]

    made = []
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    ax1.plot(it, J, "-", lw=1.2)
    ax1.set_ylabel("objective")
    ax2.semilogy(it, np.maximum(np.abs(G), 1e-16), "-", lw=1.2, color="tab:red")
    ax2.set_ylabel("|volume gap|")
    ax2.set_xlabel("outer iteration (cumulative)")
    for b in boundaries:
        for ax in (ax1, ax2):
            ax.axvline(b - 0.5, color="0.8", lw=0.8)
    fig.suptitle("convergence history")
    path = os.path.join(fig_dir, "convergence.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    made.append(path)

    per_round = {}
    for r in rows:
        per_round[int(r["round"])] = (float(r["eta1_sq"]), float(r["eta2_sq"]))
    ks = sorted(per_round)
    e1 = [per_round[k][0] for k in ks]
    e2 = [per_round[k][1] for k in ks]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogy(ks, e1, "o-", label="eta1^2")
    ax.semilogy(ks, e2, "s-", label="eta2^2")
    ax.set_xlabel("round")
    ax.set_ylabel("total squared indicator")
    ax.legend()
    path = os.path.join(fig_dir, "estimators.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    made.append(path)
    return made


def render_run(out_dir):
    """Render every figure for a finished run directory; returns the paths."""
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    made = []
    for k, path in _round_files(out_dir):
        made.extend(render_round(path, fig_dir, k))
    csv_path = os.path.join(out_dir, "history.csv")
    if os.path.exists(csv_path):
        made.extend(render_history(csv_path, fig_dir))
    return made
