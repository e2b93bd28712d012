"""Command-line surface for the design, scheduling, and estimation pipelines.

Exit codes: 0 success, 2 validation error (single machine-parsable line on
stderr), 64 usage error, 70 internal invariant breach.  All randomness
flows from --seed (fallback: the SPECTRALFORGE_SEED environment variable),
and identical invocations produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .core import ProbeState, simulate_schedule, spectral_range
from .design import analytic_design, lp_max_range_design, reduction_study
from .errors import InternalError, SpectralForgeError
from .figures import FIGURE_IDS, reproduce_figure
from .freq import bmse_curve
from .io import (
    decomposition_to_json,
    prior_from_json,
    probe_from_json,
    probe_to_json,
    read_json,
    schedule_from_json,
    schedule_to_json,
    spectrum_from_json,
    target_from_json,
    target_to_json,
    weights_from_json,
    weights_to_json,
    write_csv,
    write_json,
    write_manifest,
)
from .phase import optimize_phase_probe
from .scenarios import optimize_target_spectrum
from .schedule import birkhoff_decompose, build_schedule, minimal_switch_design

USAGE_EXIT = 64
VALIDATION_EXIT = 2
INTERNAL_EXIT = 70


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"spectralforge: usage-error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _parse_int_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _parse_tau(text: str, points: int) -> list[float]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(np.linspace(float(lo), float(hi), points))
    return [float(text)]


def _resolve_seed(value) -> int:
    if value is None:
        env = os.environ.get("SPECTRALFORGE_SEED")
        value = int(env) if env else 0
    value = int(value)
    if value < 0:
        raise SpectralForgeError("seed must be nonnegative")
    return value


def _manifest_for(out_path, argv, seed, inputs, outputs, started, **extra):
    write_manifest(
        Path(str(out_path) + ".manifest.json"),
        command_line=argv,
        seed=seed,
        inputs=[p for p in inputs if p and Path(p).exists()],
        outputs=outputs,
        wall_time_s=time.perf_counter() - started,
        **extra,
    )


def build_parser() -> _Parser:
    parser = _Parser(
        prog="spectralforge",
        description="Design effective spectra, compile switching schedules, "
        "and evaluate Bayesian estimation performance.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"spectralforge {__version__} (file formats v1)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="synthesize weights for a target")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--method", choices=["lp", "analytic", "minimal"], default="lp")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=None, help="chain length (minimal method)")
    p.add_argument("--tries", type=int, default=64, help="chains sampled (minimal)")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("schedule", help="compile weights into a switching schedule")
    p.add_argument("--weights", required=True)
    p.add_argument("--total-time", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--decomposition-out", default=None)

    p = sub.add_parser("simulate", help="evolve a probe through a schedule")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--probe", default=None, help="probe JSON (default: uniform)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("estimate-freq", help="Bayesian frequency estimation curve")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--tau", required=True, help="value or range a..b")
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("estimate-phase", help="Bayesian phase estimation optimum")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="result JSON")
    p.add_argument("--csv", default=None, help="optional n,cost,trace_norm CSV")

    p = sub.add_parser("optimize-spectrum", help="outer search over target ratios")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--objective", choices=["min-bmse", "phase-cost"], default="min-bmse")
    p.add_argument("--prior", default=None)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("reduction-study", help="random-task range statistics")
    p.add_argument("--n", required=True, help="sizes, e.g. 2..10")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("reproduce", help="regenerate a bundled study")
    p.add_argument("figure", choices=list(FIGURE_IDS))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=80)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--no-plot", action="store_true")
    return parser


def _cmd_design(args, argv, started):
    seed = _resolve_seed(args.seed)
    spectrum = spectrum_from_json(read_json(args.spectrum))
    target = target_from_json(read_json(args.target))
    if args.method == "lp":
        result = lp_max_range_design(spectrum, target)
        payload = weights_to_json(result.weights)
        extra = {"achieved_range": result.achieved_range, "method": result.method}
    elif args.method == "analytic":
        result = analytic_design(spectrum, target)
        payload = weights_to_json(result.weights)
        extra = {"achieved_range": result.achieved_range, "method": result.method}
    else:
        k = args.k if args.k is not None else max(spectrum.n - 2, 1)
        design = minimal_switch_design(
            spectrum, target, k=k, tries=args.tries, seed=seed
        )
        payload = weights_to_json(design.implied_weights())
        extra = {
            "achieved_range": design.achieved_range,
            "method": "minimal",
            "chain": [list(p.mapping) for p in design.chain],
            "chain_weights": [float(w) for w in design.weights],
        }
    payload.update(extra)
    write_json(args.out, payload)
    _manifest_for(
        args.out, argv, seed, [args.spectrum, args.target], [args.out], started
    )
    return 0


def _cmd_schedule(args, argv, started):
    weights = weights_from_json(read_json(args.weights))
    decomposition = birkhoff_decompose(weights)
    sched = build_schedule(decomposition, total_time=args.total_time)
    write_json(args.out, schedule_to_json(sched))
    outputs = [args.out]
    if args.decomposition_out:
        write_json(args.decomposition_out, decomposition_to_json(decomposition))
        outputs.append(args.decomposition_out)
    _manifest_for(args.out, argv, 0, [args.weights], outputs, started)
    return 0


def _cmd_simulate(args, argv, started):
    spectrum = spectrum_from_json(read_json(args.spectrum))
    sched = schedule_from_json(read_json(args.schedule))
    if args.probe:
        probe = probe_from_json(read_json(args.probe))
    else:
        probe = ProbeState.uniform(spectrum.n)
    final = simulate_schedule(spectrum, sched, args.omega, probe)
    payload = probe_to_json(final)
    payload["omega"] = args.omega
    payload["total_time"] = sched.total_time
    write_json(args.out, payload)
    _manifest_for(
        args.out,
        argv,
        0,
        [args.spectrum, args.schedule, args.probe],
        [args.out],
        started,
    )
    return 0


def _cmd_estimate_freq(args, argv, started):
    seed = _resolve_seed(args.seed)
    spectrum = spectrum_from_json(read_json(args.spectrum))
    grid = _parse_tau(args.tau, args.points)
    rows = bmse_curve(spectrum, grid, restarts=args.restarts, seed=seed)
    write_csv(args.out, ["tau", "bmse", "qfi", "restart_winner", "iters"], rows)
    _manifest_for(args.out, argv, seed, [args.spectrum], [args.out], started)
    return 0


def _cmd_estimate_phase(args, argv, started):
    seed = _resolve_seed(args.seed)
    spectrum = spectrum_from_json(read_json(args.spectrum))
    prior = prior_from_json(read_json(args.prior))
    result = optimize_phase_probe(
        spectrum, prior, restarts=args.restarts, seed=seed
    )
    payload = {
        "cost": result.cost,
        "trace_norm": result.trace_norm,
        "probe": probe_to_json(result.probe),
        "estimator_phases": [float(phi) for phi, _ in result.measurement],
        "iterations": result.iterations,
        "converged": result.converged,
    }
    write_json(args.out, payload)
    outputs = [args.out]
    if args.csv:
        write_csv(
            args.csv,
            ["n", "cost", "trace_norm"],
            [{"n": spectrum.n, "cost": result.cost, "trace_norm": result.trace_norm}],
        )
        outputs.append(args.csv)
    _manifest_for(args.out, argv, seed, [args.spectrum, args.prior], outputs, started)
    return 0


def _cmd_optimize_spectrum(args, argv, started):
    seed = _resolve_seed(args.seed)
    spectrum = spectrum_from_json(read_json(args.spectrum))
    objective = "min_bmse_over_tau" if args.objective == "min-bmse" else "phase_cost"
    prior = prior_from_json(read_json(args.prior)) if args.prior else None
    report = optimize_target_spectrum(
        spectrum, objective=objective, budget=args.budget, seed=seed, prior=prior
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    report_path = outdir / "report.json"
    write_json(
        report_path,
        {
            "scenario": report.scenario_id,
            "base_levels": [float(x) for x in report.base.levels],
            "target": target_to_json(report.target),
            "weights": weights_to_json(report.design.weights),
            "effective_levels": [float(x) for x in report.design.effective.levels],
            "achieved_range": report.design.achieved_range,
            "schedule": schedule_to_json(report.schedule),
            "metrics": report.metrics,
            "provenance": report.provenance,
        },
    )
    outputs = [report_path]
    if objective == "min_bmse_over_tau":
        grid = np.linspace(
            0.0,
            2.5 * (spectrum.n - 1) / spectral_range(spectrum),
            31,
        )
        rows = bmse_curve(report.design.effective, grid, restarts=4, seed=seed)
        curve_path = outdir / "curves.csv"
        write_csv(curve_path, ["tau", "bmse", "qfi", "restart_winner", "iters"], rows)
        outputs.append(curve_path)
    _manifest_for(
        outdir / "run", argv, seed, [args.spectrum, args.prior], outputs, started
    )
    return 0


def _cmd_reduction_study(args, argv, started):
    seed = _resolve_seed(args.seed)
    n_values = _parse_int_range(args.n)
    rows = reduction_study(n_values, samples=args.samples, seed=seed, jobs=args.jobs)
    write_csv(
        args.out,
        ["n", "mean_range", "mean_min_range", "samples", "seed"],
        [
            {
                "n": r.n,
                "mean_range": r.mean_range,
                "mean_min_range": r.mean_min_range,
                "samples": r.samples,
                "seed": r.seed,
            }
            for r in rows
        ],
    )
    _manifest_for(
        args.out,
        argv,
        seed,
        [],
        [args.out],
        started,
        extra={
            "spectrum_law": rows[0].spectrum_law,
            "target_law": rows[0].target_law,
        },
    )
    return 0


def _cmd_reproduce(args, argv, started):
    seed = _resolve_seed(args.seed)
    reproduce_figure(
        args.figure,
        args.out,
        seed=seed,
        budget=args.budget,
        samples=args.samples,
        restarts=args.restarts,
        jobs=args.jobs,
        plot=not args.no_plot,
        command_line=argv,
    )
    return 0


_COMMANDS = {
    "design": _cmd_design,
    "schedule": _cmd_schedule,
    "simulate": _cmd_simulate,
    "estimate-freq": _cmd_estimate_freq,
    "estimate-phase": _cmd_estimate_phase,
    "optimize-spectrum": _cmd_optimize_spectrum,
    "reduction-study": _cmd_reduction_study,
    "reproduce": _cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        return _COMMANDS[args.command](args, ["spectralforge", *argv], started)
    except SpectralForgeError as exc:
        print(
            f"spectralforge: error: {type(exc).__name__}: {exc}", file=sys.stderr
        )
        return VALIDATION_EXIT
    except InternalError as exc:
        traceback.print_exc()
        print(f"spectralforge: internal-error: {exc}", file=sys.stderr)
        return INTERNAL_EXIT
    except Exception as exc:  # never exit silently on a bug
        traceback.print_exc()
        print(
            f"spectralforge: internal-error: {type(exc).__name__}: {exc}",
            file=sys.stderr,
        )
        return INTERNAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
