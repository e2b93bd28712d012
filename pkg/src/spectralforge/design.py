"""Synthesis of bi-stochastic weights realizing target level ratios.

Two construction routes are provided: an analytic nullspace construction
(scale a homogeneous-system solution into the box) and a linear program
maximizing the effective spectral range subject to the ratio constraints.
Also contains the edge-target reduction formulas and the randomized
reduction study.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .core import (
    BistochasticMatrix,
    Spectrum,
    TargetVector,
    apply_weights,
    spectral_range,
    target_ratios,
)
from .errors import (
    DegenerateRangeError,
    IndexOutOfRangeError,
    NoDirectionError,
    ValidationError,
)
from .simplex import solve_bounded_lp

__all__ = [
    "LpProblem",
    "DesignResult",
    "ReductionStudyRow",
    "build_design_lp",
    "standard_form",
    "analytic_design",
    "lp_max_range_design",
    "edge_range",
    "min_edge_range",
    "reduction_study",
    "SPECTRUM_SAMPLING_LAW",
    "TARGET_SAMPLING_LAW",
]

RATIO_MATCH_TOL = 1e-7


@dataclass(frozen=True)
class LpProblem:
    """Max-range design LP over vectorized weight-matrix variables.

    ``cost @ v`` is the effective spectral range.  Equality rows are the
    n-2 ratio constraints plus the 2n-1 independent row/column sum rows;
    variables are box-bounded.  Rows of the weight matrix are ordered so
    that the ratio-0 anchor is block 0 and the ratio-1 anchor is block n-1,
    hence the cost vector is [-levels, 0, ..., 0, +levels].
    """

    cost: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def n(self) -> int:
        return int(np.sqrt(self.cost.size))


@dataclass(frozen=True)
class DesignResult:
    """Weights realizing a target, with the effective spectrum they produce."""

    weights: BistochasticMatrix
    effective: Spectrum
    achieved_range: float
    method: str
    target: TargetVector

    def __post_init__(self):
        got = target_ratios(self.effective).ratios
        err = float(np.max(np.abs(got - self.target.ratios)))
        if err > RATIO_MATCH_TOL:
            raise ValidationError(f"effective ratios deviate from target by {err:.3e}")
        if abs(self.achieved_range - spectral_range(self.effective)) > 1e-9:
            raise ValidationError("achieved_range inconsistent with effective spectrum")


def _anchored_order(t: TargetVector) -> list[int]:
    """Row order putting the ratio-0 anchor first and the ratio-1 anchor last."""
    i0, i1 = t.anchor_indices()
    middle = [i for i in range(t.n) if i not in (i0, i1)]
    return [i0] + middle + [i1]


def build_design_lp(s: Spectrum, t: TargetVector) -> tuple[LpProblem, list[int]]:
    """Assemble the max-range LP for a spectrum and target.

    Returns the problem plus the row order mapping problem blocks back to
    the caller's level indices (block k holds weight-matrix row order[k]).
    """
    if s.n != t.n:
        raise ValidationError("spectrum and target sizes differ")
    if spectral_range(s) <= 0.0:
        raise DegenerateRangeError("cannot design for a zero-range spectrum")
    n = s.n
    lam = s.levels
    order = _anchored_order(t)
    ratios = t.ratios[order]

    rows = []
    rhs = []
    for k in range(1, n - 1):  # ratio rows for non-anchor blocks
        row = np.zeros((n, n))
        row[k, :] = lam
        row[0, :] -= (1.0 - ratios[k]) * lam
        row[n - 1, :] += -ratios[k] * lam
        rows.append(row.ravel())
        rhs.append(0.0)
    for k in range(n):  # row sums
        row = np.zeros((n, n))
        row[k, :] = 1.0
        rows.append(row.ravel())
        rhs.append(1.0)
    for j in range(n - 1):  # column sums; the last is implied
        row = np.zeros((n, n))
        row[:, j] = 1.0
        rows.append(row.ravel())
        rhs.append(1.0)

    cost = np.zeros((n, n))
    cost[n - 1, :] = lam
    cost[0, :] -= lam
    problem = LpProblem(
        cost=cost.ravel(),
        a_eq=np.array(rows),
        b_eq=np.array(rhs),
        lower=np.zeros(n * n),
        upper=np.ones(n * n),
    )
    return problem, order


def standard_form(problem: LpProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inequality-doubled standard form: maximize c.v, A v <= b, v >= 0.

    Kept as a documented alternative to the native equality handling; each
    equality row appears as a +/- pair (upper bound b and lower bound -b).
    """
    a = np.vstack([problem.a_eq, -problem.a_eq])
    b = np.concatenate([problem.b_eq, -problem.b_eq])
    return problem.cost.copy(), a, b


def solve_standard_form(problem: LpProblem):
    """Solve the inequality form by appending slack variables; returns (v, value)."""
    cost, a_ub, b_ub = standard_form(problem)
    m, nv = a_ub.shape
    a = np.hstack([a_ub, np.eye(m)])
    c = np.concatenate([cost, np.zeros(m)])
    lower = np.zeros(nv + m)
    upper = np.full(nv + m, np.inf)
    sol = solve_bounded_lp(c, a, b_ub, lower, upper)
    return sol.x[:nv], sol.value


def _result_from_matrix(entries, s, t, method):
    weights = BistochasticMatrix(entries)
    effective = apply_weights(weights, s)
    return DesignResult(
        weights=weights,
        effective=effective,
        achieved_range=spectral_range(effective),
        method=method,
        target=t,
    )


def analytic_design(s: Spectrum, t: TargetVector) -> DesignResult:
    """Nullspace construction: R = 1/n + scale * direction.

    The homogeneous ratio + zero-sum system is solved by a rank-revealing
    SVD; the range cost projected onto the nullspace picks the direction,
    which is then scaled by the largest factor keeping every entry in
    [0, 1].  Ratios are invariant under that scaling.

    Raises
    ------
    NoDirectionError
        If every nullspace element has zero effective range (the LP route
        may still succeed via a shifted baseline).
    """
    problem, order = build_design_lp(s, t)
    n = s.n
    # The coefficient matrix of the homogeneous system equals a_eq (only the
    # sum-row right-hand sides differ), and nullspaces ignore the RHS.
    row_scale = np.linalg.norm(problem.a_eq, axis=1, keepdims=True)
    _, sv, vt = np.linalg.svd(problem.a_eq / row_scale)
    rank = int(np.sum(sv > 1e-12 * sv[0]))
    null_basis = vt[rank:].T  # columns span ker(A)
    if null_basis.shape[1] == 0:
        raise NoDirectionError("constraint system has trivial nullspace")

    direction = null_basis @ (null_basis.T @ problem.cost)
    gain = float(problem.cost @ direction)
    if abs(gain) <= 1e-12 * max(1.0, float(np.abs(s.levels).max())):
        raise NoDirectionError("no nullspace direction changes the spectral range")
    if gain < 0:
        direction = -direction

    scale = _max_box_scale(direction, n)
    eps = scale * direction.reshape(n, n)
    r_ordered = np.full((n, n), 1.0 / n) + eps
    entries = np.empty_like(r_ordered)
    entries[order, :] = r_ordered
    return _result_from_matrix(entries, s, t, "analytic")


def _max_box_scale(direction: np.ndarray, n: int) -> float:
    """Largest s with 1/n + s*direction inside [0, 1] elementwise."""
    pos = direction > 0
    neg = direction < 0
    bounds = []
    if np.any(pos):
        bounds.append(np.min((1.0 - 1.0 / n) / direction[pos]))
    if np.any(neg):
        bounds.append(np.min((1.0 / n) / (-direction[neg])))
    return float(min(bounds)) if bounds else 0.0


def lp_max_range_design(s: Spectrum, t: TargetVector) -> DesignResult:
    """Weights maximizing the effective spectral range for a target.

    Solved with the bounded-variable primal simplex; the optimum dominates
    any analytic construction for the same inputs.
    """
    entries, _ = _solve_max_range(s.levels, t.ratios)
    return _result_from_matrix(entries, s, t, "lp")


def _solve_max_range(levels: np.ndarray, ratios: np.ndarray):
    """Core LP call on raw arrays; returns (weight matrix, achieved range)."""
    s = Spectrum(levels)
    t = TargetVector(ratios)
    problem, order = build_design_lp(s, t)
    sol = solve_bounded_lp(
        problem.cost, problem.a_eq, problem.b_eq, problem.lower, problem.upper
    )
    n = s.n
    entries = np.empty((n, n))
    entries[order, :] = sol.x.reshape(n, n)
    return entries, sol.value


def edge_range(s: Spectrum, m: int) -> float:
    """Effective range when the lowest m levels collapse to 0 and the rest to 1.

    Requires a canonical (ascending) spectrum; the value is the mean of the
    top n-m levels minus the mean of the bottom m.
    """
    if not s.is_canonical():
        raise ValidationError("edge_range requires an ascending spectrum")
    if not 1 <= m <= s.n - 1:
        raise IndexOutOfRangeError(f"split index {m} outside 1..{s.n - 1}")
    lam = s.levels
    return float(lam[m:].mean() - lam[:m].mean())


def min_edge_range(s: Spectrum) -> tuple[float, int]:
    """Minimum edge-target range and its split index (ties to the smaller m)."""
    canon = s if s.is_canonical() else s.canonical()
    best, best_m = np.inf, 0
    for m in range(1, canon.n):
        val = edge_range(canon, m)
        if val < best:
            best, best_m = val, m
    return float(best), best_m


# ── reduction study ──────────────────────────────────────────────────────

SPECTRUM_SAMPLING_LAW = (
    "gaps: n-1 iid Uniform[0,1] draws rescaled to total n-1; "
    "levels are the cumulative sums from 0 (range exactly n-1)"
)
TARGET_SAMPLING_LAW = (
    "n iid Uniform[0,1] draws; the minimum entry is pinned to 0 "
    "and the maximum to 1"
)


@dataclass(frozen=True)
class ReductionStudyRow:
    """Averages for one system size; also records sampling metadata."""

    n: int
    mean_range: float
    mean_min_range: float
    samples: int
    seed: int
    spectrum_law: str = SPECTRUM_SAMPLING_LAW
    target_law: str = TARGET_SAMPLING_LAW

    def __post_init__(self):
        if not (-1e-9 <= self.mean_min_range <= self.mean_range + 1e-9):
            raise ValidationError("expected 0 <= mean_min_range <= mean_range")
        if self.mean_range > self.n - 1 + 1e-9:
            raise ValidationError("mean range exceeds the sampled spectral range")


def sample_study_spectrum(rng: np.random.Generator, n: int) -> np.ndarray:
    gaps = rng.uniform(0.0, 1.0, size=n - 1)
    gaps *= (n - 1.0) / gaps.sum()
    return np.concatenate([[0.0], np.cumsum(gaps)])


def sample_study_target(rng: np.random.Generator, n: int) -> np.ndarray:
    t = rng.uniform(0.0, 1.0, size=n)
    t[np.argmin(t)] = 0.0
    t[np.argmax(t)] = 1.0
    return t


def _study_batch(n: int, seed: int, indices: range) -> tuple[float, float]:
    tot_range = 0.0
    tot_min = 0.0
    for i in indices:
        rng = np.random.default_rng([seed, n, i])
        lam = sample_study_spectrum(rng, n)
        t = sample_study_target(rng, n)
        _, value = _solve_max_range(lam, t)
        tot_range += value
        tot_min += min_edge_range(Spectrum(lam))[0]
    return tot_range, tot_min


def reduction_study(
    n_values: list[int],
    samples: int,
    seed: int,
    jobs: int = 1,
    batch: int = 250,
) -> list[ReductionStudyRow]:
    """Average achieved and minimum spectral ranges over random tasks.

    Each sample draws a spectrum with range n-1 and a target vector (laws
    recorded on the output rows), solves the max-range LP, and separately
    evaluates the minimum edge-target range of the spectrum.  Per-sample
    seeds derive from (seed, n, index), so results are independent of the
    worker count.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    n_values = list(dict.fromkeys(int(n) for n in n_values))
    tasks = []
    for n in n_values:
        for start in range(0, samples, batch):
            tasks.append((n, range(start, min(start + batch, samples))))
    results = Parallel(n_jobs=jobs)(
        delayed(_study_batch)(n, seed, idx) for n, idx in tasks
    )
    rows = []
    for n in n_values:
        tot_r = tot_m = 0.0
        for (task_n, _), (r, m) in zip(tasks, results):
            if task_n == n:
                tot_r += r
                tot_m += m
        rows.append(
            ReductionStudyRow(
                n=n,
                mean_range=tot_r / samples,
                mean_min_range=tot_m / samples,
                samples=samples,
                seed=seed,
            )
        )
    return rows
