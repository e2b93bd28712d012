"""Compile bi-stochastic weights into executable switching schedules.

A weight matrix is decomposed into a convex mixture of permutations
(Birkhoff decomposition), each permutation into two-level swaps, and the
mixture into a time-fraction schedule.  A randomized minimal-switch
designer realizes a target with O(n) two-level operations instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    BistochasticMatrix,
    Permutation,
    Spectrum,
    SwitchingSchedule,
    TargetVector,
    apply_weights,
    spectral_range,
)
from .errors import (
    InternalError,
    InfeasibleError,
    MatchingFailedError,
    NoFeasibleChainError,
    ValidationError,
)
from .simplex import solve_bounded_lp

__all__ = [
    "BirkhoffDecomposition",
    "MinimalDesign",
    "birkhoff_decompose",
    "permutation_to_transpositions",
    "build_schedule",
    "minimal_switch_design",
    "term_bound",
    "transposition_bound",
]

SUPPORT_TOL = 1e-12
RECON_TOL = 1e-10


def term_bound(n: int) -> int:
    """Maximum number of permutations needed for any n x n weight matrix."""
    return n * n - 2 * n + 2


def transposition_bound(n: int) -> int:
    """Worst-case total two-level swaps to implement a full decomposition."""
    return n**3 - 3 * n**2 + 4 * n - 2


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """Convex mixture of permutations reconstructing a weight matrix."""

    terms: tuple  # of (weight, Permutation)

    def __post_init__(self):
        terms = tuple((float(w), p) for w, p in self.terms)
        if not terms:
            raise ValidationError("decomposition needs at least one term")
        if any(w <= 0 for w, _ in terms):
            raise ValidationError("term weights must be positive")
        total = sum(w for w, _ in terms)
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(f"term weights sum to {total!r}, expected 1")
        n = terms[0][1].n
        if len(terms) > term_bound(n):
            raise ValidationError(
                f"{len(terms)} terms exceed the n^2-2n+2 bound for n={n}"
            )
        object.__setattr__(self, "terms", terms)

    @property
    def n(self) -> int:
        return self.terms[0][1].n

    def matrix(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for w, p in self.terms:
            out += w * p.matrix()
        return out


def _lex_matching(support: np.ndarray) -> list[int] | None:
    """Perfect matching on a boolean support matrix.

    Augmenting-path search trying rows and columns in ascending order, so
    the result is deterministic for a given support.
    """
    n = support.shape[0]
    col_owner = [-1] * n

    def augment(row: int, seen: list[bool]) -> bool:
        for col in range(n):
            if support[row, col] and not seen[col]:
                seen[col] = True
                if col_owner[col] < 0 or augment(col_owner[col], seen):
                    col_owner[col] = row
                    return True
        return False

    for row in range(n):
        if not augment(row, [False] * n):
            return None
    perm = [0] * n
    for col, row in enumerate(col_owner):
        perm[row] = col
    return perm


def birkhoff_decompose(weights: BistochasticMatrix) -> BirkhoffDecomposition:
    """Greedy decomposition with a hard term-count guarantee.

    Repeatedly extracts a permutation supported on the positive entries,
    subtracting the minimum weight along it.  If the greedy pass exceeds
    the n^2-2n+2 bound, an affine-dependence (Caratheodory) compression
    removes surplus terms without changing the reconstruction.

    Raises
    ------
    MatchingFailedError
        If the residual has no perfect matching above threshold, which
        signals an input violating bi-stochasticity beyond tolerance.
    """
    n = weights.n
    residual = weights.clamped()
    residual[residual < SUPPORT_TOL] = 0.0
    raw: list[tuple[float, Permutation]] = []
    for _ in range(n * n + n):
        if residual.max() <= SUPPORT_TOL:
            break
        perm = _lex_matching(residual > SUPPORT_TOL)
        if perm is None:
            raise MatchingFailedError(
                "no perfect matching on the positive support; "
                "input is not bi-stochastic within tolerance"
            )
        idx = (np.arange(n), np.array(perm))
        theta = float(residual[idx].min())
        raw.append((theta, Permutation(tuple(perm))))
        residual[idx] -= theta
        residual[residual < SUPPORT_TOL] = 0.0
    else:
        raise InternalError("greedy decomposition failed to terminate")

    raw = _compress_terms(raw, n)
    decomposition = BirkhoffDecomposition(tuple(raw))
    recon_err = float(np.abs(decomposition.matrix() - weights.entries).max())
    if recon_err > RECON_TOL:
        raise ValidationError(
            f"reconstruction residual {recon_err:.3e} > {RECON_TOL:g}; "
            "input weights are bi-stochastic only to lower precision"
        )
    return decomposition


def _compress_terms(terms, n):
    """Caratheodory compression to at most n^2-2n+2 terms.

    While the term count exceeds the bound, the permutation matrices are
    affinely dependent; moving the weights along a dependence direction
    zeroes at least one term and leaves the mixture unchanged.
    """
    bound = term_bound(n)
    terms = [(w, p) for w, p in terms if w > SUPPORT_TOL]
    while len(terms) > bound:
        stack = np.array([np.append(p.matrix().ravel(), 1.0) for _, p in terms]).T
        _, sv, vt = np.linalg.svd(stack)
        null = vt[np.sum(sv > 1e-12 * sv[0]) :]
        if null.shape[0] == 0:
            raise InternalError("term count above bound but no affine dependence")
        direction = null[0]
        weights = np.array([w for w, _ in terms])
        pos = direction > 1e-14
        if not np.any(pos):
            direction = -direction
            pos = direction > 1e-14
        step = np.min(weights[pos] / direction[pos])
        weights = weights - step * direction
        terms = [
            (float(w), p) for w, (_, p) in zip(weights, terms) if w > SUPPORT_TOL
        ]
    return terms


def permutation_to_transpositions(p: Permutation) -> list[tuple[int, int]]:
    """Selection-sort decomposition into at most n-1 two-level swaps.

    Applying the returned swaps in order to the identity arrangement
    reproduces ``p``: start with ``a = [0..n-1]`` and exchange ``a[i], a[j]``
    for each pair.
    """
    arrangement = list(range(p.n))
    swaps = []
    for i in range(p.n - 1):
        if arrangement[i] == p.mapping[i]:
            continue
        j = arrangement.index(p.mapping[i], i + 1)
        arrangement[i], arrangement[j] = arrangement[j], arrangement[i]
        swaps.append((i, j))
    return swaps


def build_schedule(
    d: BirkhoffDecomposition, total_time: float
) -> SwitchingSchedule:
    """One segment per term, ordered by descending weight (stable tie-break)."""
    if total_time <= 0:
        raise ValidationError("total_time must be positive")
    ordered = sorted(d.terms, key=lambda term: -term[0])
    sched = SwitchingSchedule(segments=tuple(ordered), total_time=float(total_time))
    if sched.transposition_count() > transposition_bound(d.n):
        raise InternalError("schedule exceeds the switching-operation bound")
    return sched


# ── minimal switching ────────────────────────────────────────────────────


@dataclass(frozen=True)
class MinimalDesign:
    """Target realized by a chain of cumulatively composed two-level swaps.

    ``weights[0]`` multiplies the identity and ``weights[i]`` the product of
    the first ``i`` chain swaps, so ``k = len(chain)`` two-level operations
    suffice to run the whole schedule.
    """

    weights: np.ndarray
    chain: tuple  # of Permutation, each a single two-level swap
    effective: Spectrum
    achieved_range: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(self.chain) + 1:
            raise ValidationError("need one weight per chain prefix plus identity")
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ValidationError("weights must be a probability vector")
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return len(self.chain)

    def prefix_permutations(self) -> list[Permutation]:
        n = self.chain[0].n if self.chain else self.effective.n
        prefixes = [Permutation.identity(n)]
        for swap in self.chain:
            prefixes.append(swap.compose(prefixes[-1]))
        return prefixes

    def implied_weights(self) -> BistochasticMatrix:
        out = np.zeros((self.effective.n, self.effective.n))
        for w, p in zip(self.weights, self.prefix_permutations()):
            out += w * p.matrix()
        return BistochasticMatrix(out)


def _chain_lp(lam, ratios, prefixes):
    """LP over prefix weights: maximize range subject to ratio constraints."""
    n = lam.size
    k1 = len(prefixes)
    i0 = int(np.argmin(ratios))
    i1 = int(np.argmax(ratios))
    effective_levels = np.array([p.matrix() @ lam for p in prefixes])  # (k1, n)
    rows = []
    for j in range(n):
        if j in (i0, i1):
            continue
        rows.append(
            effective_levels[:, j]
            - (1.0 - ratios[j]) * effective_levels[:, i0]
            - ratios[j] * effective_levels[:, i1]
        )
    rows.append(np.ones(k1))
    rhs = np.zeros(len(rows))
    rhs[-1] = 1.0
    cost = effective_levels[:, i1] - effective_levels[:, i0]
    sol = solve_bounded_lp(
        cost, np.array(rows), rhs, np.zeros(k1), np.ones(k1)
    )
    return sol.x, sol.value


def _all_swaps(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def minimal_switch_design(
    s: Spectrum,
    t: TargetVector,
    k: int,
    tries: int = 64,
    seed: int = 0,
    exhaustive: bool = False,
) -> MinimalDesign:
    """Realize a target with a chain of k two-level swaps.

    Samples ``tries`` chains of distinct random swaps (or enumerates every
    ordered chain when ``exhaustive`` is set, n <= 4 only), solves the
    per-chain weight LP, and returns the best feasible design.  At least
    n-2 chain operations are required by the constraint count.

    Raises
    ------
    NoFeasibleChainError
        If no sampled chain admits the target; raise ``k`` or ``tries``.
    """
    if s.n != t.n:
        raise ValidationError("spectrum and target sizes differ")
    if k < s.n - 2:
        raise ValidationError(f"need k >= n-2 = {s.n - 2} chain operations")
    if tries < 1:
        raise ValidationError("tries must be >= 1")
    n = s.n
    swaps = _all_swaps(n)
    if k > len(swaps):
        raise ValidationError(
            f"k={k} exceeds the {len(swaps)} distinct two-level swaps for n={n}"
        )
    if exhaustive:
        if n > 4:
            raise ValidationError("exhaustive chain search is limited to n <= 4")
        candidates = list(itertools.permutations(range(len(swaps)), k))
    else:
        rng = np.random.default_rng(seed)
        candidates = [
            tuple(rng.choice(len(swaps), size=k, replace=False))
            for _ in range(tries)
        ]

    best = None
    for chain_idx in candidates:
        chain = [Permutation.transposition(n, *swaps[i]) for i in chain_idx]
        prefixes = [Permutation.identity(n)]
        for swap in chain:
            prefixes.append(swap.compose(prefixes[-1]))
        try:
            weights, value = _chain_lp(s.levels, t.ratios, prefixes)
        except InfeasibleError:
            continue
        if value <= 1e-12:  # zero or inverted range cannot realize the ratios
            continue
        if best is None or value > best[0] + 1e-12:
            best = (value, weights, chain)
    if best is None:
        raise NoFeasibleChainError(
            f"no feasible chain among {len(candidates)} candidates (k={k})"
        )
    value, weights, chain = best
    mixture = np.zeros((n, n))
    prefixes = [Permutation.identity(n)]
    for swap in chain:
        prefixes.append(swap.compose(prefixes[-1]))
    for w, p in zip(weights, prefixes):
        mixture += w * p.matrix()
    effective = apply_weights(BistochasticMatrix(mixture), s)
    return MinimalDesign(
        weights=weights,
        chain=tuple(chain),
        effective=effective,
        achieved_range=spectral_range(effective),
    )
