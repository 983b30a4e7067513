"""Figures for the experiment CSVs.

matplotlib is imported lazily so the solver modules never pull it in.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update(
        {
            "figure.figsize": (5.0, 3.6),
            "axes.grid": True,
            "grid.alpha": 0.3,
            "legend.frameon": False,
            "savefig.dpi": 150,
            # fixed metadata so repeated renders are identical
            "svg.hashsalt": "sdncc",
        }
    )
    return plt


def render_fig2(rows: Sequence, path: str | Path) -> Path:
    """Traffic per second against server count, one line per method."""
    plt = _pyplot()
    fig, ax = plt.subplots()
    styles = {"greedy": ("o-", "in-network caching/computing"), "exhaustive": ("s-", "exhaustive"), "baseline": ("k--", "origin only")}
    for method in dict.fromkeys(r.method for r in rows):
        pts = sorted((r.sweep_value, r.traffic_per_s) for r in rows if r.method == method)
        fmt, label = styles.get(method, ("x-", method))
        ax.plot([p[0] for p in pts], [p[1] for p in pts], fmt, label=label)
    ax.set_xlabel("caching/computing nodes")
    ax.set_ylabel("network traffic (bit·hop/s)")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, metadata={"Software": None} if path.suffix == ".png" else None)
    plt.close(fig)
    return path


def render_fig3(rows: Sequence[dict], path: str | Path) -> Path:
    """Optimal copy counts against popularity, closed form and oracle."""
    plt = _pyplot()
    fig, ax = plt.subplots()
    lam = [r["popularity"] for r in rows]
    ax.plot(lam, [r["content_optimal"] for r in rows], "o-", label="content, closed form")
    ax.plot(lam, [r["content_oracle"] for r in rows], "o", mfc="none", label="content, grid search")
    ax.plot(lam, [r["vm_optimal"] for r in rows], "s-", label="computation, closed form")
    ax.plot(lam, [r["vm_oracle"] for r in rows], "s", mfc="none", label="computation, grid search")
    ax.set_xscale("log")
    ax.set_xlabel("service popularity (requests per period)")
    ax.set_ylabel("optimal number of copies")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, metadata={"Software": None} if path.suffix == ".png" else None)
    plt.close(fig)
    return path
