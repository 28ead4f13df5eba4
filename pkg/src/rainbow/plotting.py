"""Figures written next to CSV/JSON reports.

Every function takes the already computed report object and a target
path, draws with the Agg backend and closes the figure.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams.update(
    {
        "font.size": 9,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "savefig.dpi": 150,
    }
)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_concentration(report, path):
    """Empirical tails against the exponential bound, one panel per sign."""
    fig, axes = plt.subplots(1, 2, figsize=(7, 3), sharey=True)
    for ax, delta in zip(axes, (-1, 1)):
        rows = [r for r in report.rows if r.delta == delta]
        lam = [r.lam for r in rows]
        ax.plot(lam, [min(r.bound, 1.0) for r in rows], "k--", label="bound")
        ax.plot(lam, [max(r.frequency, 1.0 / report.trials / 10) for r in rows], "o-", label="empirical")
        ax.set_yscale("log")
        ax.set_xlabel(r"$\lambda$")
        ax.set_title(f"delta = {delta:+d}")
    axes[0].set_ylabel("tail probability")
    axes[0].legend(frameon=False)
    fig.suptitle(f"n={report.n}, k={report.k}, alpha={report.alpha:.3g}, trials={report.trials}")
    return _save(fig, path)


def plot_xi_histogram(stats, path, s: int | None = None):
    fig, ax = plt.subplots(figsize=(4, 3))
    xs = list(stats.histogram)
    ys = [stats.histogram[x] / stats.trials for x in xs]
    ax.bar(xs, ys, color="0.5")
    if s is not None:
        ax.axvline(s - 1, color="k", ls="--", lw=1)
    ax.set_xlabel(r"$\xi_F$")
    ax.set_ylabel("probability" if stats.exact else "frequency")
    return _save(fig, path)


def plot_hyperplane_counts(classification, path):
    k = len(classification.coordinates)
    fig, axes = plt.subplots(1, k, figsize=(2.4 * k, 2.6), sharey=True, squeeze=False)
    for ax, c in zip(axes[0], classification.coordinates):
        colors = ["C3" if a in c.fat else "C0" if a in c.thin else "0.6" for a in range(len(c.counts))]
        ax.bar(range(1, len(c.counts) + 1), c.counts, color=colors)
        ax.axhline(float(classification.fat_threshold), color="C3", ls="--", lw=0.8)
        ax.axhline(float(classification.bounded_threshold), color="k", ls=":", lw=0.8)
        ax.set_title(f"coord {c.coord + 1}: {c.case}", fontsize=8)
        ax.set_xlabel("value")
    axes[0][0].set_ylabel(r"$|H_i(a) \cap F|$")
    return _save(fig, path)


def plot_mixing(counts, bounds, path):
    fig, ax = plt.subplots(figsize=(3.5, 3.5))
    ax.scatter([float(b) for b in bounds], counts, s=6)
    top = max([float(b) for b in bounds] + list(counts) + [1])
    ax.plot([0, top], [0, top], "k--", lw=0.8)
    ax.set_xlabel("mixing bound")
    ax.set_ylabel("disjoint pairs")
    return _save(fig, path)


def plot_catalog(certificates, path):
    fig, ax = plt.subplots(figsize=(max(4, 0.35 * len(certificates)), 3))
    labels = [",".join(map(str, c.f)) for c in certificates]
    colors = ["C2" if c.valid else "C3" for c in certificates]
    ax.bar(range(len(certificates)), [c.coefficient for c in certificates], color=colors)
    ax.set_xticks(range(len(certificates)))
    ax.set_xticklabels(labels, rotation=90, fontsize=7)
    ax.set_ylabel("coefficient mod p")
    if certificates:
        ax.set_title(f"s={certificates[0].s}, p={certificates[0].p}")
    return _save(fig, path)


def plot_battery(rows, path):
    fig, ax = plt.subplots(figsize=(6, 0.3 * len(rows) + 1))
    names = [r.name for r in rows]
    ax.barh(range(len(rows)), [r.seconds for r in rows], color=["C2" if r.passed else "C3" for r in rows])
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("seconds")
    return _save(fig, path)
