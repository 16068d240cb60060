"""Figure renderers for the report path.

Every experiment that writes delimited output can also render a matplotlib
figure next to it.  All functions save to a file and close the figure; the Agg
backend keeps this headless-safe.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_density_figure(grids, path, titles=None, suptitle=None):
    """Heatmaps of one or more densities; x rightwards, momentum upwards."""
    if not isinstance(grids, (list, tuple)):
        grids = [grids]
    k = len(grids)
    ncols = min(k, 2)
    nrows = (k + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 4.0 * nrows), squeeze=False)
    for ax in axes.ravel()[k:]:
        ax.axis("off")
    for idx, grid in enumerate(grids):
        ax = axes.ravel()[idx]
        im = ax.imshow(
            grid.weights.T,
            origin="lower",
            cmap="turbo",
            extent=(0, 1, 0, 1),
            interpolation="nearest",
        )
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        if titles:
            ax.set_title(titles[idx])
        fig.colorbar(im, ax=ax, fraction=0.046)
    if suptitle:
        fig.suptitle(suptitle)
    fig.tight_layout()
    _save(fig, path)


def save_fidelity_figure(series_list, labels, path, logy=False, xlabel="iteration t", ylabel="fidelity"):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for series, label in zip(series_list, labels):
        ax.plot(series.t, series.f, lw=1.4, label=label)
    if logy:
        ax.set_yscale("log")
    else:
        ax.set_ylim(0, 1.05)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    if any(labels):
        ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_scan_figure(result, path):
    """Half-life collapse: t_f against eps^2 * n_q with the fitted power law."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    markers = "osD^v<>"
    n_qs = sorted({r.n_q for r in result.rows})
    for k, n_q in enumerate(n_qs):
        pts = [(r.epsilon**2 * r.n_q, r.t_f) for r in result.rows if r.n_q == n_q and not r.saturated]
        if pts:
            xs, ys = zip(*pts)
            ax.loglog(xs, ys, markers[k % len(markers)], ms=5, ls="none", label=f"n_q={n_q}")
    xs = np.array(sorted(r.epsilon**2 * r.n_q for r in result.rows if not r.saturated))
    if xs.size:
        ax.loglog(
            xs,
            result.prefactor * xs ** (-result.slope),
            "k-",
            lw=1.2,
            label=f"fit: {result.prefactor:.2f} x^(-{result.slope:.2f})",
        )
    ax.set_xlabel(r"$\epsilon^2 n_q$")
    ax.set_ylabel(r"$t_f$")
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_marginal_figure(weights, path, xlabel="x index", highlight=None):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(np.arange(len(weights)), weights, lw=1.0)
    if highlight is not None:
        for h in np.atleast_1d(highlight):
            ax.axvline(h, color="crimson", ls="--", lw=0.8, alpha=0.7)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("probability")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_spectrum_figure(pairs, path, register="y"):
    freqs = [p[0] for p in pairs]
    weights = [p[1] for p in pairs]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.stem(freqs, weights, basefmt=" ")
    ax.set_xlabel(f"{register}-register frequency")
    ax.set_ylabel("weight")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
