"""Figure rendering for the scan and verify artifacts.

Renders a magnitude heatmap for torus scans and a residual-versus-tolerance
chart for verification reports, next to the delimited outputs they mirror.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_scan_heatmap(T1, T2, values, path, title: str) -> None:
    """Save |values| over the (t1, t2) parameter grid as a heatmap."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    mags = np.abs(np.asarray(values))
    im = ax.pcolormesh(np.asarray(T1), np.asarray(T2), mags, shading="auto",
                       cmap="viridis")
    fig.colorbar(im, ax=ax, label="magnitude")
    ax.set_xlabel("t1")
    ax.set_ylabel("t2")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report_chart(report: dict, path) -> None:
    """Save a per-check residual chart with tolerance markers."""
    checks = report["checks"]
    names = [c["name"] for c in checks]
    residuals = np.array([max(c["residual"], 1e-18) for c in checks])
    tolerances = np.array([max(c["tolerance"], 1e-18) for c in checks])
    passed = np.array([c["passed"] for c in checks])

    fig, ax = plt.subplots(figsize=(7.0, 0.28 * len(checks) + 1.6))
    y = np.arange(len(checks))
    colors = np.where(passed, "#2a7e43", "#b2362b")
    ax.barh(y, np.log10(residuals) + 18.0, left=-18.0, color=colors, height=0.6)
    ax.plot(np.log10(tolerances), y, "k|", markersize=9, label="tolerance")
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("log10 residual")
    ax.set_title(
        "checks: {}/{} passed".format(report["n_passed"], report["n_checks"])
    )
    ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
