"""Matplotlib figure rendering for the CLI report paths (PNG files written
next to the CSV/JSON artifacts)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_heatmap(values, path, title: str = "", extent=None) -> None:
    arr = np.asarray(values, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(arr, origin="lower", extent=extent, cmap="magma")
    fig.colorbar(im, ax=ax, shrink=0.85)
    if title:
        ax.set_title(title, fontsize=10)
    ax.set_xlabel("Re w")
    ax.set_ylabel("Im w")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_convergence(eps_list, series: dict, path, title: str = "",
                     ylabel: str = "error") -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    for name, vals in series.items():
        ax.loglog(eps_list, vals, "o-", label=name)
    ax.set_xlabel("mollification radius")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_refine_trace(steps, path) -> None:
    ks = [s.k for s in steps]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.5, 3.2))
    ax1.semilogy(ks, [s.diameter_bound for s in steps], "k--", label="bound 10^-k")
    ax1.semilogy(ks, [max(s.support_diameter, 1e-17) for s in steps], "o-",
                 label="support diameter")
    ax1.set_xlabel("step k")
    ax1.legend(fontsize=8)
    ax1.grid(True, alpha=0.3)
    ax2.plot(ks, [s.mass for s in steps], "o-", label="mass")
    ax2.plot(ks, [s.pairing for s in steps], "s-", label="pairing")
    ax2.set_xlabel("step k")
    ax2.legend(fontsize=8)
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_leaves(motion, path, n_points: int = 101, title: str = "") -> None:
    """Leaf graphs over the real diameter of the base disk."""
    t = np.linspace(-0.9, 0.9, n_points)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.5, 3.2), sharex=True)
    for a in motion.tau:
        vals = motion.phi(np.full(t.shape, a), t.astype(np.complex128))
        ax1.plot(t, np.real(vals), lw=1.0)
        ax2.plot(t, np.imag(vals), lw=1.0)
    ax1.set_xlabel("z (real section)")
    ax1.set_ylabel("Re phi")
    ax2.set_xlabel("z (real section)")
    ax2.set_ylabel("Im phi")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
