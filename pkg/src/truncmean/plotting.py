"""Rendering of tabulated half-width curves to image files."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_curves(path: str, names, rows, title: str = "") -> None:
    """Log-log plot of half-width against epsilon.

    rows: iterable of (epsilon, [value per name]); infinite values break the
    line, matching the "inf" cells of the delimited output.
    """
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    eps = [e for e, _ in rows]
    for j, name in enumerate(names):
        ys = [v[j] if math.isfinite(v[j]) else float("nan") for _, v in rows]
        ax.plot(eps, ys, label=name)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.invert_xaxis()
    ax.set_xlabel("epsilon (one-sided miss budget)")
    ax.set_ylabel("half-width")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
