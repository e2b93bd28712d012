"""Spectral design toolkit for switching-controlled parameter estimation.

Synthesizes bi-stochastic level weights realizing target spectra, compiles
them into permutation switching schedules, and quantifies the resulting
gain in single-shot Bayesian frequency and phase estimation.
"""

__version__ = "0.1.0"

from .core import (
    BistochasticMatrix,
    Permutation,
    ProbeState,
    Spectrum,
    SwitchingSchedule,
    TargetVector,
    apply_weights,
    general_control_weights,
    schedule_weights,
    simulate_schedule,
    spectral_range,
    target_ratios,
)
from .design import (
    DesignResult,
    LpProblem,
    ReductionStudyRow,
    analytic_design,
    edge_range,
    lp_max_range_design,
    min_edge_range,
    reduction_study,
)
from .freq import (
    EffectiveOperators,
    FreqEstimationResult,
    GaussianPrior,
    bmse,
    bmse_curve,
    effective_operators,
    optimize_probe,
    qfi_effective,
    solve_sylvester,
)
from .phase import (
    THREE_PEAK_PRIOR,
    PhaseEstimationResult,
    PhasePrior,
    build_r01,
    flat_prior_frequency_map,
    optimize_phase_probe,
    phase_cost,
    wrap_gaussian_prior,
)
from .schedule import (
    BirkhoffDecomposition,
    MinimalDesign,
    birkhoff_decompose,
    build_schedule,
    minimal_switch_design,
    permutation_to_transpositions,
)
from .scenarios import (
    LevelTable,
    ScenarioReport,
    augment_with_ancilla,
    degenerate_qubit_spectrum,
    linear_spectrum,
    load_levels,
    min_bmse_over_tau,
    optimize_target_spectrum,
)
