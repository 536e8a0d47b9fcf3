"""Report figures rendered to files next to the CSV/JSON output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import BenchmarkReport, ConvergenceReport


def convergence_figure(report: ConvergenceReport, path) -> None:
    """Log-log plot of the Hausdorff gap medians with min/max band."""
    fig, ax = plt.subplots(figsize=(6, 4))
    n = np.asarray(report.n_list, dtype=float)
    med = np.asarray(report.medians)
    positive = med > 0
    ax.plot(n, med, "o-", color="tab:blue", label="median gap")
    ax.fill_between(n, report.mins, report.maxs, alpha=0.2, color="tab:blue",
                    label="min/max over reps")
    if np.all(positive):
        ref = med[0] * np.sqrt(n[0] / n)
        ax.plot(n, ref, "--", color="gray", lw=1, label=r"$n^{-1/2}$ guide")
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("support-gap estimate")
    ax.set_title(f"Region consistency ({report.reps} reps, "
                 f"{report.n_dirs} directions, ref n={report.n_ref})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def benchmark_figure(report: BenchmarkReport, path) -> None:
    """Runtime medians vs n per dimension, with fitted slopes."""
    fig, ax = plt.subplots(figsize=(6, 4))
    n = np.asarray(report.n_list, dtype=float)
    for i, d in enumerate(report.d_list):
        times = np.asarray(report.medians[i])
        label = f"d={d}"
        if not np.isnan(report.slopes[i]):
            label += f" (slope {report.slopes[i]:.2f})"
        ax.plot(n, np.maximum(times, 1e-9), "o-", label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("median wall time [s]")
    title = "Iterative solver runtime"
    if report.alpha is not None:
        title += f" (expected shortfall, alpha={report.alpha:g})"
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
