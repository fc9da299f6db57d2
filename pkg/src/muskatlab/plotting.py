"""Figures for a finished run, rendered off-screen next to the CSV outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_norms", "plot_interface", "render_run"]

_STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _column(rows, name):
    return np.array([float(r[name]) for r in rows])


def plot_norms(rows: list[dict], path) -> Path:
    """Norm histories (log scale) and the dissipation / identity residual panel."""
    t = _column(rows, "t")
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2), constrained_layout=True)
        for name, label in (("norm_1", r"$\|f\|_1$"), ("norm_2", r"$\|f\|_2$"),
                            ("l2", r"$\|f\|_{L^2}$"), ("linf", r"$\|f\|_{L^\infty}$"),
                            ("grad_linf", r"$\|\nabla f\|_{L^\infty}$")):
            y = _column(rows, name)
            if np.any(y > 0):
                ax1.semilogy(t, np.where(y > 0, y, np.nan), label=label)
        ax1.set_xlabel("t")
        ax1.legend(frameon=False)
        ax2.plot(t, _column(rows, "dissipation"), color="k", label="D(f)")
        ax2.set_xlabel("t")
        ax2.set_ylabel("D(f)")
        res = _column(rows, "identity_residual")
        if np.any(np.isfinite(res)):
            tw = ax2.twinx()
            tw.semilogy(t, np.where(res > 0, res, np.nan), color="tab:red", lw=0.8)
            tw.set_ylabel("identity residual", color="tab:red")
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_interface(first, last, path, times=(None, None)) -> Path:
    """Initial and final interface: profiles in 1D, colour maps in 2D."""
    g = first.grid
    labels = [f"t = {t:.4g}" if t is not None else "" for t in times]
    with plt.rc_context(_STYLE):
        if g.dim == 1:
            fig, ax = plt.subplots(figsize=(5.0, 3.0), constrained_layout=True)
            x = g.coords[0]
            ax.plot(x, first.values, label=labels[0])
            ax.plot(x, last.values, "--", label=labels[1])
            ax.set_xlabel("x")
            ax.set_ylabel("f")
            ax.legend(frameon=False)
        else:
            fig, axes = plt.subplots(1, 2, figsize=(7.0, 3.0), constrained_layout=True)
            lim = max(np.abs(first.values).max(), np.abs(last.values).max()) or 1.0
            for ax, f, lab in zip(axes, (first, last), labels):
                im = ax.imshow(f.values.T, origin="lower", cmap="RdBu_r", vmin=-lim, vmax=lim,
                               extent=(0, g.length, 0, g.length))
                ax.set_title(lab)
                ax.set_xlabel("x1")
                ax.set_ylabel("x2")
            fig.colorbar(im, ax=axes, shrink=0.8, label="f")
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def render_run(out_dir, rows, first, last, times) -> list[Path]:
    out_dir = Path(out_dir)
    return [plot_norms(rows, out_dir / "norms.png"),
            plot_interface(first, last, out_dir / "interface.png", times)]
