"""Render study CSVs to PNG files next to the delimited output.

Plot rendering stays out of the computation pipelines; this module only
reads the CSVs the figure drivers wrote.  The Agg backend keeps rendering
headless and deterministic.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_figure"]


def _read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=150, metadata={"Software": "spectralforge"})
    plt.close(fig)
    return path


def _plot_grouped_curves(rows, group_key, png_path, title):
    """One panel per group value, one line per series, BMSE against time."""
    groups = sorted({row[group_key] for row in rows}, key=float)
    fig, axes = plt.subplots(
        1, len(groups), figsize=(4.2 * len(groups), 3.4), squeeze=False, sharey=True
    )
    for ax, group in zip(axes[0], groups):
        for series in sorted({r["series"] for r in rows if r[group_key] == group}):
            pts = [
                (float(r["tau"]), float(r["bmse"]))
                for r in rows
                if r[group_key] == group and r["series"] == series
            ]
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=series)
        ax.set_xlabel(r"$\tau$")
        ax.set_title(f"{group_key} = {group}")
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel("BMSE")
    fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, png_path)


def render_figure(fig_id: str, outdir) -> list[Path]:
    """Render the plots for one study from its CSVs; returns files written."""
    outdir = Path(outdir)
    written = []

    if fig_id == "fig4":
        rows = _read_csv(outdir / "fig4_curves.csv")
        written.append(
            _plot_grouped_curves(
                rows, "m", outdir / "fig4.png", "Degeneracy lifting via switching"
            )
        )
    elif fig_id == "fig6":
        rows = _read_csv(outdir / "fig6_curves.csv")
        fig, ax = plt.subplots(figsize=(5, 3.4))
        for series in sorted({r["series"] for r in rows}):
            pts = sorted(
                (float(r["tau"]), float(r["bmse"]))
                for r in rows
                if r["series"] == series
            )
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=series)
        ax.set_xlabel(r"$\tau$")
        ax.set_ylabel("BMSE")
        ax.set_title("Atomic 4f-shell spectrum, original vs adapted")
        ax.legend()
        fig.tight_layout()
        written.append(_save(fig, outdir / "fig6.png"))
    elif fig_id == "fig8":
        rows = _read_csv(outdir / "fig8_top.csv")
        written.append(
            _plot_grouped_curves(
                rows, "n", outdir / "fig8_top.png", "Linear spectra vs optimized"
            )
        )
        bottom = _read_csv(outdir / "fig8_bottom.csv")
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ax.plot(
            [int(r["n"]) for r in bottom],
            [100 * float(r["relative_improvement"]) for r in bottom],
            marker="o",
        )
        ax.set_xlabel("levels n")
        ax.set_ylabel("improvement at optimal time [%]")
        ax.set_title("Gain over the linear spectrum")
        fig.tight_layout()
        written.append(_save(fig, outdir / "fig8_bottom.png"))
    elif fig_id == "fig10":
        rows = _read_csv(outdir / "fig10_costs.csv")
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ns = [int(r["n"]) for r in rows]
        ax.plot(ns, [float(r["cost_linear"]) for r in rows], marker="o", label="linear")
        ax.plot(
            ns,
            [float(r["cost_optimized"]) for r in rows],
            marker="s",
            label="optimized",
        )
        ax.set_xlabel("levels n")
        ax.set_ylabel("average periodic cost")
        ax.set_title("Three-peak prior: prior-adapted spectra")
        ax.legend()
        fig.tight_layout()
        written.append(_save(fig, outdir / "fig10.png"))
    elif fig_id == "fig12":
        rows = _read_csv(outdir / "fig12_curves.csv")
        bases = sorted({r["base"] for r in rows})
        fig, axes = plt.subplots(1, len(bases), figsize=(4.5 * len(bases), 3.4))
        axes = np.atleast_1d(axes)
        for ax, base in zip(axes, bases):
            for d_a in sorted({int(r["d_a"]) for r in rows if r["base"] == base}):
                pts = sorted(
                    (float(r["tau"]), float(r["bmse"]))
                    for r in rows
                    if r["base"] == base and int(r["d_a"]) == d_a
                )
                ax.plot(
                    [p[0] for p in pts], [p[1] for p in pts], label=f"$d_A$ = {d_a}"
                )
            ax.set_xlabel(r"$\tau$")
            ax.set_title(f"{base} sensor with auxiliary levels")
            ax.legend()
        axes[0].set_ylabel("BMSE")
        fig.tight_layout()
        written.append(_save(fig, outdir / "fig12.png"))
    elif fig_id == "figA":
        rows = _read_csv(outdir / "figA_study.csv")
        fig, axes = plt.subplots(1, 2, figsize=(8.5, 3.4))
        ns = [int(r["n"]) for r in rows]
        axes[0].plot(ns, [float(r["mean_range"]) for r in rows], marker="o")
        axes[0].set_title("mean achieved range")
        axes[1].plot(ns, [float(r["mean_min_range"]) for r in rows], marker="o")
        axes[1].set_title("mean minimum range")
        for ax in axes:
            ax.set_xlabel("levels n")
        fig.tight_layout()
        written.append(_save(fig, outdir / "figA.png"))
    return written
