"""Matplotlib figures rendered alongside the delimited output.

One figure per report: ladder rates against log(1/scale) with the fitted
slope lines, or the per-scale comparison of a theorem probe. Files are PNG,
rendered headlessly; figure output never feeds back into any computation.
"""
from __future__ import annotations

import math
from typing import Sequence

from .estimators import DiscrepancyReport, MdimReport
from .util import log_value


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_mdim_report(report: MdimReport, path, scale_name: str = "scale") -> None:
    plt = _pyplot()
    xs = [-log_value(r.scale) for r in report.ladder]
    lo = [r.rate_lower.value for r in report.ladder]
    hi = [r.rate_upper.value for r in report.ladder]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.fill_between(xs, lo, hi, alpha=0.18, color="tab:blue", label="rate bracket")
    ax.plot(xs, lo, "o-", color="tab:blue", ms=4,
            label=f"lower (slope {report.slope_lower:.3f})")
    ax.plot(xs, hi, "s-", color="tab:orange", ms=4,
            label=f"upper (slope {report.slope_upper:.3f})")
    ax.set_xlabel(f"log(1/{scale_name})")
    ax.set_ylabel("rate")
    ax.set_title(report.quantity)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_discrepancy(report: DiscrepancyReport, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.4, 3.4))
    sides = [("left: " + report.left.quantity, report.left, "tab:blue")]
    palette = ("tab:orange", "tab:green", "tab:red")
    for i, rep in enumerate(report.right):
        sides.append((f"right: {rep.quantity}", rep, palette[i % len(palette)]))
    for label, rep, color in sides:
        xs = [-log_value(r.scale) for r in rep.ladder]
        mid = [(r.rate_lower.value + r.rate_upper.value) / 2 for r in rep.ladder]
        lo = [r.rate_lower.value for r in rep.ladder]
        hi = [r.rate_upper.value for r in rep.ladder]
        ax.fill_between(xs, lo, hi, alpha=0.12, color=color)
        ax.plot(xs, mid, "o-", ms=4, color=color, label=label)
    ax.set_xlabel("log(1/scale)")
    ax.set_ylabel("rate")
    ax.set_title(f"{report.theorem_id}: {report.verdict} "
                 f"(discrepancy {report.discrepancy:.3f}, tol {report.tolerance})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_series(series: Sequence, path, title: str, xlabel: str = "n",
                ylabel: str = "log count") -> None:
    """Generic per-n log-count plot for dispersion series."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for label, pairs in series:
        xs = [n for n, _ in pairs]
        ys = [math.log(v) if v > 0 else float("nan") for _, v in pairs]
        ax.plot(xs, ys, "o-", ms=4, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
