"""Figures written next to the CSV reports.

Numbers in the CSV files are authoritative; these are conveniences.  All
figures go through the object API (no pyplot state) and are saved as
self-contained SVG with a fixed hash salt and no timestamp, so the same data
gives the same bytes.
"""

from __future__ import annotations

import matplotlib as mpl
from matplotlib.figure import Figure

mpl.rcParams["svg.hashsalt"] = "covertime"
mpl.rcParams["svg.fonttype"] = "none"

_MARKERS = "osD^v<>ph*"


def _figure(width=6.4, height=4.0):
    fig = Figure(figsize=(width, height))
    ax = fig.add_subplot(1, 1, 1)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_curves(curves, path, title=None):
    """C(tau) against tau, one series per strategy."""
    fig, ax = _figure()
    for i, c in enumerate(curves):
        line, = ax.plot(c.taus, c.c_tau, marker=_MARKERS[i % len(_MARKERS)], ms=3, label=str(c.spec))
        line.set_gid(f"series-{c.spec}")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$C(\tau)$")
    if title:
        ax.set_title(title)
    ax.legend()
    _save(fig, path)


def plot_budget(probes, path):
    """p against B, one series per graph."""
    fig, ax = _figure()
    for i, pr in enumerate(probes):
        line, = ax.plot(pr.budgets, pr.p, marker=_MARKERS[i % len(_MARKERS)], label=pr.graph)
        line.set_gid(f"series-{pr.graph}")
    ax.set_xlabel("budget B")
    ax.set_ylabel("p (sampled minimum is the true minimum)")
    ax.set_ylim(0, 1.05)
    ax.legend()
    _save(fig, path)


def plot_degree_histogram(hist, path, label="graph"):
    fig, ax = _figure()
    deg = [d for d, _ in hist]
    cnt = [c for _, c in hist]
    line, = ax.plot(deg, cnt, "o", ms=3, label=label)
    line.set_gid(f"series-{label}")
    if deg and deg[0] > 0:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("degree")
    ax.set_ylabel("nodes")
    ax.legend()
    _save(fig, path)


def plot_reward(table, path, r_star=None, label="E(R)"):
    fig, ax = _figure()
    line, = ax.plot([r for r, _ in table], [v for _, v in table], label=label)
    line.set_gid("series-reward")
    if r_star is not None:
        ax.axvline(r_star, color="grey", ls="--", lw=1, label=f"r* = {r_star}")
    ax.set_xlabel("cutoff r")
    ax.set_ylabel("expected reward")
    ax.legend()
    _save(fig, path)
