"""Figure rendering for the CLI report paths.  Headless only."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_iterates", "plot_l1", "plot_reference", "plot_compare"]


def plot_iterates(t_mid, marginals, path: str, title: str = "") -> None:
    """One curve per iterate of the passage-density approximation."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, m in enumerate(marginals):
        ax.plot(t_mid, m, lw=1.2, label=f"iterate {i + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("passage density")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_l1(values, path: str, ylabel: str = "L1 step distance") -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    idx = np.arange(1, len(values) + 1)
    ax.semilogy(idx, values, "o-", lw=1.2)
    ax.set_xlabel("iterate")
    ax.set_ylabel(ylabel)
    ax.set_xticks(idx)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_reference(path: str, fd=None, mc=None) -> None:
    """Reference passage density: fine-grid curve and/or binned simulation."""
    if fd is None and mc is None:
        raise ValueError("nothing to plot: pass fd and/or mc")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if fd is not None:
        ax.plot(fd.t, fd.density, lw=1.2, label="transition iteration")
    if mc is not None:
        ax.errorbar(mc.bucket_mid, mc.bucket_density,
                    yerr=2 * mc.bucket_density_se, fmt=".", ms=4,
                    capsize=2, lw=0.8, label="simulation (2 s.e.)")
    ax.set_xlabel("t")
    ax.set_ylabel("passage density")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_compare(t_mid, marginal, path: str, fd=None, mc=None) -> None:
    """Final iterate against the independent references."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if fd is not None:
        ax.plot(fd.t, fd.density, lw=1.0, color="0.4",
                label="transition iteration")
    if mc is not None:
        ax.errorbar(mc.bucket_mid, mc.bucket_density,
                    yerr=2 * mc.bucket_density_se, fmt=".", ms=4,
                    capsize=2, lw=0.8, color="0.6", label="simulation")
    ax.plot(t_mid, marginal, lw=1.4, color="C3", label="kernel iteration")
    ax.set_xlabel("t")
    ax.set_ylabel("passage density")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
