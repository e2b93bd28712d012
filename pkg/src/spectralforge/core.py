"""Domain types and exact kinematics for switching-based spectral design.

The central objects are an energy spectrum (eigenvalues of the generator
that imprints the unknown parameter), bi-stochastic weight matrices mapping
original levels onto effective levels, and switching schedules: permutation
sequences whose time fractions realize a given weight matrix.

Conventions
-----------
A :class:`Permutation` ``p`` acting inside a schedule segment means the
system evolves under the conjugated generator whose level ``j`` carries
eigenvalue ``levels[p(j)]``.  The associated permutation matrix ``M`` has
``M[j, p(j)] = 1`` so that ``M @ levels`` reads off the per-level eigenvalue
and a convex mixture of segment matrices is exactly the bi-stochastic weight
matrix of the schedule.  Each segment is a conjugation (apply the
permutation, evolve, undo it), so the net basis relabeling of a full
schedule is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRangeError,
    DimensionMismatchError,
    NotUnitaryError,
    ValidationError,
)

__all__ = [
    "Spectrum",
    "TargetVector",
    "BistochasticMatrix",
    "Permutation",
    "SwitchingSchedule",
    "ProbeState",
    "spectral_range",
    "target_ratios",
    "apply_weights",
    "simulate_schedule",
    "schedule_weights",
    "general_control_weights",
]

RATIO_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Spectrum:
    """Ordered list of real generator eigenvalues (dimensionless energy).

    Levels are stored in the order given, so level identity (needed to pair
    probe amplitudes with levels) survives design operations; use
    :meth:`canonical` when an operation requires ascending order.
    """

    levels: np.ndarray
    label: str = ""

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size < 2:
            raise ValidationError("spectrum needs at least 2 levels")
        if not np.all(np.isfinite(levels)):
            raise ValidationError("spectrum levels must be finite")
        object.__setattr__(self, "levels", _readonly(levels))

    @property
    def n(self) -> int:
        return self.levels.size

    def canonical(self) -> "Spectrum":
        """Copy with levels sorted ascending."""
        return Spectrum(np.sort(self.levels), label=self.label)

    def is_canonical(self) -> bool:
        return bool(np.all(np.diff(self.levels) >= 0))


@dataclass(frozen=True)
class TargetVector:
    """Desired relative level positions; 0 and 1 must both be attained."""

    ratios: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ratios, dtype=float)
        if r.ndim != 1 or r.size < 2:
            raise ValidationError("target vector needs at least 2 entries")
        if np.min(r) < -RATIO_TOL or np.max(r) > 1.0 + RATIO_TOL:
            raise ValidationError("target ratios must lie in [0, 1]")
        if abs(np.min(r)) > RATIO_TOL or abs(np.max(r) - 1.0) > RATIO_TOL:
            raise ValidationError("target ratios must attain both 0 and 1")
        object.__setattr__(self, "ratios", _readonly(np.clip(r, 0.0, 1.0)))

    @property
    def n(self) -> int:
        return self.ratios.size

    def anchor_indices(self) -> tuple[int, int]:
        """(index of the first 0 entry, index of the first 1 entry)."""
        return int(np.argmin(self.ratios)), int(np.argmax(self.ratios))


@dataclass(frozen=True)
class BistochasticMatrix:
    """Nonnegative weights with unit row and column sums.

    Entry ``[i, j]`` is the relative time original level ``j`` contributes
    to effective level ``i``.  LP solvers return approximate vertices, so
    validation allows a small tolerance and :meth:`clamped` zeroes tiny
    negatives before downstream use.
    """

    entries: np.ndarray
    tolerance: float = 1e-9

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("weight matrix must be square")
        if np.min(m) < -self.tolerance:
            raise ValidationError(
                f"negative weight {np.min(m):.3e} below tolerance {self.tolerance:g}"
            )
        for axis, what in ((0, "column"), (1, "row")):
            sums = m.sum(axis=axis)
            if np.max(np.abs(sums - 1.0)) > self.tolerance:
                worst = float(np.max(np.abs(sums - 1.0)))
                raise ValidationError(f"{what} sums deviate from 1 by {worst:.3e}")
        object.__setattr__(self, "entries", _readonly(m))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def clamped(self) -> np.ndarray:
        """Entries with tiny negatives zeroed (safe for downstream use)."""
        out = np.array(self.entries, copy=True)
        out[out < 0.0] = 0.0
        return out


@dataclass(frozen=True)
class Permutation:
    """Bijection on {0..n-1}; ``mapping[j]`` is the image of ``j``."""

    mapping: tuple

    def __post_init__(self):
        m = tuple(int(x) for x in self.mapping)
        if sorted(m) != list(range(len(m))):
            raise ValidationError(f"not a permutation of 0..{len(m)-1}: {m}")
        object.__setattr__(self, "mapping", m)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        m = list(range(n))
        m[i], m[j] = m[j], m[i]
        return cls(tuple(m))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Permutation":
        return cls(tuple(int(np.argmax(row)) for row in m))

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, j: int) -> int:
        return self.mapping[j]

    def matrix(self) -> np.ndarray:
        """Matrix M with M[j, p(j)] = 1, so M @ levels = levels[p]."""
        m = np.zeros((self.n, self.n))
        m[np.arange(self.n), list(self.mapping)] = 1.0
        return m

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self . other)(j) = self(other(j))."""
        return Permutation(tuple(self.mapping[other.mapping[j]] for j in range(self.n)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for j, image in enumerate(self.mapping):
            inv[image] = j
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return self.mapping == tuple(range(self.n))


@dataclass(frozen=True)
class SwitchingSchedule:
    """Time-fraction-weighted permutation sequence implementing a weight matrix."""

    segments: tuple  # of (fraction, Permutation)
    total_time: float

    def __post_init__(self):
        segs = tuple((float(f), p) for f, p in self.segments)
        if not segs:
            raise ValidationError("schedule needs at least one segment")
        if self.total_time <= 0:
            raise ValidationError("total_time must be positive")
        fractions = np.array([f for f, _ in segs])
        if np.any(fractions <= 0) or np.any(fractions > 1):
            raise ValidationError("segment fractions must lie in (0, 1]")
        if abs(fractions.sum() - 1.0) > 1e-12:
            raise ValidationError(
                f"segment fractions sum to {fractions.sum()!r}, expected 1"
            )
        n = segs[0][1].n
        if any(p.n != n for _, p in segs):
            raise ValidationError("all segment permutations must share one size")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "total_time", float(self.total_time))

    @property
    def n(self) -> int:
        return self.segments[0][1].n

    def transposition_count(self) -> int:
        from .schedule import permutation_to_transpositions

        return sum(len(permutation_to_transpositions(p)) for _, p in self.segments)


@dataclass(frozen=True)
class ProbeState:
    """Unit-norm complex amplitude vector in the generator eigenbasis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.amplitudes, dtype=complex)
        if c.ndim != 1 or c.size < 1:
            raise ValidationError("probe state must be a nonempty vector")
        norm2 = float(np.sum(np.abs(c) ** 2))
        if abs(norm2 - 1.0) > 1e-12:
            raise ValidationError(f"probe norm^2 = {norm2!r}, expected 1")
        object.__setattr__(self, "amplitudes", _readonly(c))

    @classmethod
    def uniform(cls, n: int) -> "ProbeState":
        return cls(np.full(n, 1.0 / np.sqrt(n), dtype=complex))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "ProbeState":
        c = rng.normal(size=n) + 1j * rng.normal(size=n)
        return cls(c / np.linalg.norm(c))

    @property
    def n(self) -> int:
        return self.amplitudes.size


# ── operations ───────────────────────────────────────────────────────────


def spectral_range(s: Spectrum) -> float:
    """Difference between the largest and smallest level."""
    return float(np.max(s.levels) - np.min(s.levels))


def target_ratios(s: Spectrum) -> TargetVector:
    """Relative position of each level inside the spectral range.

    Raises
    ------
    DegenerateRangeError
        If the spectral range is zero (the ratios are 0/0).
    """
    span = spectral_range(s)
    if span <= 0.0:
        raise DegenerateRangeError("target ratios undefined for zero spectral range")
    return TargetVector((s.levels - np.min(s.levels)) / span)


def apply_weights(weights: BistochasticMatrix, s: Spectrum) -> Spectrum:
    """Effective spectrum ``weights @ levels``.

    Column sums of 1 preserve the level sum; every effective level is a
    convex combination of the originals, so it stays within [min, max].
    """
    if weights.n != s.n:
        raise DimensionMismatchError(
            f"weights are {weights.n}x{weights.n} but spectrum has {s.n} levels"
        )
    return Spectrum(weights.entries @ s.levels, label=s.label)


def simulate_schedule(
    s: Spectrum,
    sched: SwitchingSchedule,
    omega: float,
    amplitudes: ProbeState,
) -> ProbeState:
    """Brute-force piecewise evolution of a probe through a schedule.

    Each segment builds its full unitary ``M exp(-i w t_k diag(levels)) M^T``
    by explicit matrix conjugation and the segment unitaries are multiplied
    out, so this is the ground-truth oracle for checking compiled schedules:
    level ``j`` ends up with phase ``omega * T * sum_k f_k levels[p_k(j)]``.
    """
    if sched.n != s.n or amplitudes.n != s.n:
        raise DimensionMismatchError("schedule/probe size does not match spectrum")
    u_total = np.eye(s.n, dtype=complex)
    for fraction, perm in sched.segments:
        m = perm.matrix()
        d = np.diag(np.exp(-1j * omega * fraction * sched.total_time * s.levels))
        u_total = (m @ d @ m.T) @ u_total
    return ProbeState(u_total @ amplitudes.amplitudes)


def schedule_weights(sched: SwitchingSchedule) -> BistochasticMatrix:
    """Bi-stochastic weight matrix realized by a schedule."""
    w = np.zeros((sched.n, sched.n))
    for fraction, perm in sched.segments:
        w += fraction * perm.matrix()
    return BistochasticMatrix(w)


def general_control_weights(
    unitaries: list[np.ndarray],
    durations: list[float],
    unitary_tol: float = 1e-10,
) -> BistochasticMatrix:
    """Weights induced by piecewise unitary control.

    For control unitaries ``U_i`` applied for durations ``d_i``, the
    effective level weights are ``p[j, m] = sum_i d_i |U_i[j, m]|^2 / sum_i
    d_i``; unitarity makes the result bi-stochastic, which is validated on
    construction, making this a checkable equivalence between arbitrary
    unitary control and switching.
    """
    durations = np.asarray(durations, dtype=float)
    if durations.size != len(unitaries) or durations.size == 0:
        raise DimensionMismatchError("need one duration per unitary")
    if np.any(durations < 0) or durations.sum() <= 0:
        raise ValidationError("durations must be nonnegative with positive sum")
    n = np.asarray(unitaries[0]).shape[0]
    weights = np.zeros((n, n))
    for u, d in zip(unitaries, durations):
        u = np.asarray(u, dtype=complex)
        if u.shape != (n, n):
            raise DimensionMismatchError("all unitaries must share one size")
        defect = np.linalg.norm(u.conj().T @ u - np.eye(n))
        if defect > unitary_tol:
            raise NotUnitaryError(f"unitarity defect {defect:.3e} > {unitary_tol:g}")
        weights += d * np.abs(u) ** 2
    return BistochasticMatrix(weights / durations.sum())
