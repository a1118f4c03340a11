"""Log-log figures of report columns."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_reports(reports, path, title: str = "") -> str:
    """One log-log panel per theorem: lhs (solid) and rhs (dotted) against N."""
    by_thm: dict = {}
    for rep in reports:
        by_thm.setdefault(rep.theorem, []).append(rep)
    n = max(len(by_thm), 1)
    cols = min(n, 3)
    rows = math.ceil(n / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.4 * rows), squeeze=False)
    for ax, (thm, reps) in zip(axes.flat, by_thm.items()):
        for rep in reps:
            first: dict = {}
            for r in rep.rows:
                if r.lhs is not None and r.lhs > 0 and r.N > 0:
                    first.setdefault(r.N, r)
            pts = sorted(first.items())
            if not pts:
                continue
            xs = [x for x, _ in pts]
            line = ax.loglog(xs, [float(r.lhs) for _, r in pts], "o-", ms=3, label=rep.name or rep.family)[0]
            rhs = [(x, float(r.rhs)) for x, r in pts if r.rhs is not None and r.rhs > 0]
            if rhs:
                ax.loglog(*zip(*rhs), ":", lw=1, color=line.get_color())
            if rep.fit is not None:
                slope, intercept, _ = rep.fit
                grid = np.array(sorted(set(xs)), dtype=float)
                ax.loglog(grid, np.exp(intercept) * grid**slope, "--", lw=0.7, color="gray")
        ax.set_title(thm, fontsize=9)
        ax.set_xlabel("N = |A|", fontsize=8)
        ax.tick_params(labelsize=7)
        if ax.lines:
            ax.legend(fontsize=6)
    for ax in list(axes.flat)[len(by_thm):]:
        ax.axis("off")
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return str(path)
