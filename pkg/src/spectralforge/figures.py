"""Reproducible study pipelines behind the bundled figure identifiers.

Each pipeline computes the data for one benchmark study (degeneracy
lifting, atomic-spectrum adaptation, linear near-optimality, prior-adapted
design, auxiliary systems, or the reduction study) and returns CSV-ready
rows plus a summary; :func:`reproduce_figure` writes them to disk with a
run manifest and, on the report path, rendered plots.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import Spectrum, spectral_range, target_ratios
from .design import lp_max_range_design, reduction_study
from .errors import UnknownFigureError
from .freq import bmse_curve
from .io import write_csv, write_json, write_manifest
from .phase import THREE_PEAK_PRIOR, optimize_phase_probe
from .scenarios import (
    augment_with_ancilla,
    bundled_level_table_path,
    degenerate_qubit_spectrum,
    linear_spectrum,
    load_levels,
    min_bmse_over_tau,
    optimize_target_spectrum,
)

__all__ = ["FIGURE_IDS", "reproduce_figure"]

FIGURE_IDS = ("fig4", "fig6", "fig8", "fig10", "fig12", "figA")

CURVE_HEADER = ["series", "tau", "bmse", "qfi", "restart_winner", "iters"]


def _curve_rows(series: str, s: Spectrum, grid, restarts: int, seed: int):
    rows = bmse_curve(s, grid, restarts=restarts, seed=seed)
    return [{"series": series, **row} for row in rows]


def _tau_grid(s: Spectrum, points: int = 31, stretch: float = 2.5):
    return np.linspace(0.0, stretch * (s.n - 1) / spectral_range(s), points)


def _adapt_and_curves(base, seed, budget, restarts, points):
    """Optimize the target for min BMSE and trace both curves."""
    report = optimize_target_spectrum(
        base,
        objective="min_bmse_over_tau",
        budget=budget,
        seed=seed,
        inner_restarts=restarts,
        tau_points=max(points // 2, 11),
    )
    grid = _tau_grid(base, points)
    rows = _curve_rows("base", base, grid, restarts, seed)
    rows += _curve_rows("optimized", report.design.effective, grid, restarts, seed)
    return report, rows


def _fig4(seed, budget, restarts, m_values=(2, 3)):
    rows, summary = [], []
    for m in m_values:
        base = degenerate_qubit_spectrum(m)
        report, curves = _adapt_and_curves(base, seed, budget, restarts, points=25)
        for row in curves:
            rows.append({"m": m, **row})
        base_min = min(r["bmse"] for r in curves if r["series"] == "base")
        opt_min = min(r["bmse"] for r in curves if r["series"] == "optimized")
        summary.append(
            {
                "m": m,
                "min_bmse_base": base_min,
                "min_bmse_optimized": opt_min,
                "optimized_target": list(report.target.ratios),
            }
        )
    header = ["m"] + CURVE_HEADER
    return {"fig4_curves": (header, rows)}, {"per_m": summary}


def _fig6(seed, budget, restarts):
    base, meta = load_levels(bundled_level_table_path())
    report, curves = _adapt_and_curves(base, seed, budget, restarts, points=25)
    return (
        {"fig6_curves": (CURVE_HEADER, curves)},
        {
            "levels": list(base.levels),
            "level_metadata": meta,
            "optimized_target": list(report.target.ratios),
        },
    )


def _fig8(seed, budget, restarts, n_values=(3, 4, 5)):
    curve_rows, bottom = [], []
    for n in n_values:
        base = linear_spectrum(n)
        report, curves = _adapt_and_curves(base, seed, budget, restarts, points=25)
        for row in curves:
            curve_rows.append({"n": n, **row})
        _, lin_min, _ = min_bmse_over_tau(
            base, tau_points=41, restarts=restarts + 2, seed=seed
        )
        _, opt_min, _ = min_bmse_over_tau(
            report.design.effective, tau_points=41, restarts=restarts + 2, seed=seed
        )
        bottom.append(
            {
                "n": n,
                "min_bmse_linear": lin_min,
                "min_bmse_optimized": opt_min,
                "relative_improvement": (lin_min - opt_min) / lin_min,
            }
        )
    return (
        {
            "fig8_top": (["n"] + CURVE_HEADER, curve_rows),
            "fig8_bottom": (
                ["n", "min_bmse_linear", "min_bmse_optimized", "relative_improvement"],
                bottom,
            ),
        },
        {"bottom": bottom},
    )


def _fig10(seed, budget, restarts, n_values=(3, 4, 5, 6)):
    rows = []
    for n in n_values:
        base = linear_spectrum(n)
        linear_cost = optimize_phase_probe(
            base, THREE_PEAK_PRIOR, restarts=restarts + 3, seed=seed
        ).cost
        report = optimize_target_spectrum(
            base,
            objective="phase_cost",
            prior=THREE_PEAK_PRIOR,
            budget=budget,
            seed=seed,
            inner_restarts=restarts,
        )
        rows.append(
            {
                "n": n,
                "cost_linear": linear_cost,
                "cost_optimized": report.metrics["best_value"],
                "optimized_target": " ".join(
                    f"{x:.6f}" for x in report.target.ratios
                ),
            }
        )
    header = ["n", "cost_linear", "cost_optimized", "optimized_target"]
    return {"fig10_costs": (header, rows)}, {"rows": rows}


def _aux_effective(base: Spectrum, d_a: int) -> Spectrum:
    """Auxiliary-augmented spectrum adapted to the linear target."""
    augmented = augment_with_ancilla(base, d_a)
    if d_a == 1:
        return augmented
    target = target_ratios(linear_spectrum(augmented.n))
    return lp_max_range_design(augmented, target).effective


def _fig12(seed, budget, restarts):
    panels = (
        ("qubit", Spectrum([-1.0, 1.0], label="qubit"), (1, 2, 4), 2.0),
        ("five-level", linear_spectrum(5), (1, 2), 3.0),
    )
    rows = []
    for name, base, aux_dims, tau_max in panels:
        grid = np.linspace(0.0, tau_max, 41)
        for d_a in aux_dims:
            effective = _aux_effective(base, d_a)
            rows += [
                {"base": name, "d_a": d_a, **row}
                for row in _curve_rows(f"aux{d_a}", effective, grid, restarts, seed)
            ]
    return (
        {"fig12_curves": (["base", "d_a"] + CURVE_HEADER, rows)},
        {"panels": [name for name, *_ in panels]},
    )


def _figA(seed, samples, jobs, n_values=range(2, 11)):
    study = reduction_study(list(n_values), samples=samples, seed=seed, jobs=jobs)
    rows = [
        {
            "n": row.n,
            "mean_range": row.mean_range,
            "mean_min_range": row.mean_min_range,
            "samples": row.samples,
            "seed": row.seed,
        }
        for row in study
    ]
    ns = np.array([row.n for row in study], dtype=float)
    slope_range = float(np.polyfit(ns, [r.mean_range for r in study], 1)[0])
    slope_min = float(np.polyfit(ns, [r.mean_min_range for r in study], 1)[0])
    summary = {
        "slope_mean_range": slope_range,
        "slope_mean_min_range": slope_min,
        "spectrum_law": study[0].spectrum_law,
        "target_law": study[0].target_law,
    }
    return (
        {"figA_study": (["n", "mean_range", "mean_min_range", "samples", "seed"], rows)},
        summary,
    )


def reproduce_figure(
    fig_id: str,
    outdir,
    seed: int = 0,
    budget: int = 80,
    restarts: int = 3,
    samples: int = 10_000,
    jobs: int = 1,
    plot: bool = True,
    command_line: list[str] | None = None,
) -> list[Path]:
    """Run one bundled study and write CSVs, manifest, and plots.

    Identical (fig_id, seed, budget, samples) invocations produce
    byte-identical CSVs.  Returns the list of files written.
    """
    if fig_id not in FIGURE_IDS:
        raise UnknownFigureError(
            f"unknown figure id {fig_id!r}; expected one of {', '.join(FIGURE_IDS)}"
        )
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()

    if fig_id == "fig4":
        tables, summary = _fig4(seed, budget, restarts)
    elif fig_id == "fig6":
        tables, summary = _fig6(seed, budget, restarts)
    elif fig_id == "fig8":
        tables, summary = _fig8(seed, budget, restarts)
    elif fig_id == "fig10":
        tables, summary = _fig10(seed, budget, restarts)
    elif fig_id == "fig12":
        tables, summary = _fig12(seed, budget, restarts)
    else:
        tables, summary = _figA(seed, samples, jobs)

    written = []
    for name, (header, rows) in tables.items():
        path = outdir / f"{name}.csv"
        write_csv(path, header, rows)
        written.append(path)

    summary_path = outdir / f"{fig_id}_summary.json"
    write_json(
        summary_path,
        {
            "figure": fig_id,
            "seed": seed,
            "budget": budget,
            "samples": samples if fig_id == "figA" else None,
            "version": __version__,
            "summary": summary,
        },
    )
    written.append(summary_path)

    if plot:
        from .plots import render_figure

        written += render_figure(fig_id, outdir)

    write_manifest(
        outdir / f"{fig_id}_manifest.json",
        command_line=command_line or ["reproduce", fig_id],
        seed=seed,
        inputs=[],
        outputs=written,
        wall_time_s=time.perf_counter() - start,
        tolerances={"ratio_match": 1e-7, "oracle_phase": 1e-10},
    )
    return written + [outdir / f"{fig_id}_manifest.json"]
