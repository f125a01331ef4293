"""Figure rendering for benchmark results.

Figures are written straight to files (Agg backend) so the report path works
headless; they accompany the delimited results, never replace them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError


def _grouped(results):
    by_method: dict[str, list] = {}
    for r in results:
        if r.error is None and np.isfinite(r.accuracy):
            by_method.setdefault(r.method, []).append(r)
    if not by_method:
        raise DataError("no successful trials to plot")
    return by_method


def plot_accuracy_by_method(results, path) -> Path:
    by_method = _grouped(results)
    methods = sorted(by_method)
    means = [np.mean([r.accuracy for r in by_method[m]]) for m in methods]
    sds = [
        np.std([r.accuracy for r in by_method[m]], ddof=1)
        if len(by_method[m]) > 1
        else 0.0
        for m in methods
    ]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(methods, means, yerr=sds, capsize=4, color="tab:blue", alpha=0.8)
    ax.set_ylabel("test accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, axis="y", alpha=0.3)
    pi_true = results[0].pi_true
    ax.set_title(f"Accuracy over {max(len(v) for v in by_method.values())} trials "
                 f"(class prior {pi_true:g})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_training_time(results, path) -> Path:
    by_method = _grouped(results)
    methods = sorted(by_method)
    means = [np.mean([r.train_seconds for r in by_method[m]]) for m in methods]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(methods, means, color="tab:orange", alpha=0.8)
    ax.set_ylabel("mean training time [s]")
    if max(means) / max(min(means), 1e-12) > 50:
        ax.set_yscale("log")
    ax.grid(True, axis="y", alpha=0.3)
    ax.set_title("Training time per trial")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_prior_estimates(results, path) -> Path | None:
    """Estimated vs true prior, one marker per trial; None when no estimates."""
    rows = [r for r in results if r.pi_hat is not None and r.error is None]
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(5, 4))
    truths = [r.pi_true for r in rows]
    ax.scatter(truths, [r.pi_hat for r in rows], alpha=0.6, color="tab:green")
    lims = (0.0, 1.0)
    ax.plot(lims, lims, "k--", lw=1)
    ax.set_xlabel("true class prior")
    ax.set_ylabel("estimated class prior")
    ax.set_xlim(*lims)
    ax.set_ylim(*lims)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_accuracy_vs_positive_count(sweep: dict, path, method: str = "puskc") -> Path:
    """Line plot of mean accuracy against the labeled-positive count."""
    l_values = sorted(sweep)
    means = [sweep[l]["methods"][method]["mean_accuracy"] for l in l_values]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(l_values, means, marker="o", color="tab:blue")
    ax.set_xlabel("labeled positive bags")
    ax.set_ylabel("mean test accuracy")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_report(results, out_dir) -> list[Path]:
    """Write the standard figure set next to the delimited output."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        plot_accuracy_by_method(results, out_dir / "accuracy.png"),
        plot_training_time(results, out_dir / "train_time.png"),
    ]
    prior_fig = plot_prior_estimates(results, out_dir / "prior_estimates.png")
    if prior_fig is not None:
        paths.append(prior_fig)
    return paths
