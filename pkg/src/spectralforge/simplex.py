"""Dense bounded-variable primal simplex.

Solves  maximize c.x  subject to  A x = b,  l <= x <= u  with finite lower
bounds (uppers may be +inf).  Two-phase: artificial variables give the
starting basis, then the real objective runs on the feasible basis.

Pricing is Dantzig (most improving reduced cost) for speed, switching
permanently to Bland's smallest-index rule once the objective stalls over
a window of degenerate pivots; Bland's rule guarantees termination, so the
solver cannot cycle.  Sized for dense desk-scale problems (tens of rows, a
few hundred columns), which is what the design pipelines produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InternalError, UnboundedError

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
RATIO_TIE_TOL = 1e-12
STALL_WINDOW = 40  # degenerate pivots tolerated before Bland takes over

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


@dataclass
class LpSolution:
    x: np.ndarray
    value: float
    iterations: int


def solve_bounded_lp(
    cost: np.ndarray,
    a_eq: np.ndarray,
    b_eq: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    max_iter: int = 50_000,
) -> LpSolution:
    """Maximize ``cost @ x`` over ``a_eq @ x = b_eq``, ``lower <= x <= upper``.

    Raises
    ------
    InfeasibleError
        If phase 1 cannot drive the artificial variables to zero.
    UnboundedError
        If an improving direction has no blocking bound.
    """
    cost = np.asarray(cost, dtype=float)
    a = np.asarray(a_eq, dtype=float)
    b = np.asarray(b_eq, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m, n = a.shape
    if not np.all(np.isfinite(lower)):
        raise ValueError("solver requires finite lower bounds")

    # Phase 1 tableau: structural columns then one artificial per row.
    resid = b - a @ lower
    signs = np.where(resid >= 0.0, 1.0, -1.0)
    a_full = np.hstack([a, np.diag(signs)])
    lo = np.concatenate([lower, np.zeros(m)])
    hi = np.concatenate([upper, np.full(m, np.inf)])
    status = np.full(n + m, _AT_LOWER, dtype=np.int8)
    status[n:] = _BASIC
    basis = np.arange(n, n + m)
    basis_inv = np.diag(signs)  # inverse of the artificial basis

    c1 = np.zeros(n + m)
    c1[n:] = -1.0
    iters = _run(c1, a_full, b, lo, hi, status, basis, basis_inv, max_iter)
    x = _assemble(a_full, b, lo, hi, status, basis, basis_inv)
    infeas = float(x[n:].sum())
    if infeas > FEAS_TOL:
        raise InfeasibleError(
            f"phase 1 left artificial mass {infeas:.3e} (constraints inconsistent)"
        )

    # Phase 2: pin artificials at zero and optimize the real objective.
    hi[n:] = 0.0
    lo[n:] = 0.0
    c2 = np.concatenate([cost, np.zeros(m)])
    iters += _run(c2, a_full, b, lo, hi, status, basis, basis_inv, max_iter)
    x = _assemble(a_full, b, lo, hi, status, basis, basis_inv)
    return LpSolution(x=x[:n], value=float(cost @ x[:n]), iterations=iters)


def _assemble(a, b, lo, hi, status, basis, basis_inv):
    x = np.where(status == _AT_UPPER, hi, lo).astype(float)
    x[basis] = 0.0
    x[basis] = basis_inv @ (b - a @ x)
    return x


def _run(c, a, b, lo, hi, status, basis, basis_inv, max_iter):
    m = a.shape[0]
    fixed = ~(hi - lo > 0.0)  # variables pinned to a single value never enter
    bland = False
    stall = 0
    for iteration in range(max_iter):
        x = _assemble(a, b, lo, hi, status, basis, basis_inv)
        y = c[basis] @ basis_inv
        reduced = c - y @ a

        gain = np.where(status == _AT_LOWER, reduced, -reduced)
        gain[(status == _BASIC) | fixed] = -np.inf
        eligible = gain > PIVOT_TOL
        if not eligible.any():
            return iteration
        if bland:
            entering = int(np.argmax(eligible))  # first eligible index
        else:
            entering = int(np.argmax(gain))

        sign = 1.0 if status[entering] == _AT_LOWER else -1.0
        w = basis_inv @ a[:, entering]
        step = sign * w  # basic values move by -step * t

        xb = x[basis]
        lob = lo[basis]
        hib = hi[basis]
        ratios = np.full(m, np.inf)
        drop = step > PIVOT_TOL
        ratios[drop] = (xb[drop] - lob[drop]) / step[drop]
        rise = (step < -PIVOT_TOL) & np.isfinite(hib)
        ratios[rise] = (hib[rise] - xb[rise]) / (-step[rise])
        np.clip(ratios, 0.0, None, out=ratios)

        t_basic = float(ratios.min()) if m else np.inf
        t_flip = hi[entering] - lo[entering]
        if not np.isfinite(min(t_basic, t_flip)):
            raise UnboundedError("improving direction with no blocking bound")

        if t_flip <= t_basic:
            # Entering variable flips to its opposite bound; basis unchanged.
            status[entering] = _AT_UPPER if sign > 0 else _AT_LOWER
            stall = 0  # flips move a strictly positive distance
            continue

        tied = ratios <= t_basic + RATIO_TIE_TOL
        candidates = np.where(tied, basis, np.iinfo(np.int64).max)
        leave_pos = int(np.argmin(candidates))  # smallest variable index (Bland)
        leaving = basis[leave_pos]
        status[leaving] = _AT_LOWER if step[leave_pos] > 0 else _AT_UPPER
        status[entering] = _BASIC
        basis[leave_pos] = entering

        pivot = w[leave_pos]
        if abs(pivot) <= PIVOT_TOL:
            raise InternalError("pivot element below tolerance")
        basis_inv[leave_pos, :] /= pivot
        col = w.copy()
        col[leave_pos] = 0.0
        basis_inv -= np.outer(col, basis_inv[leave_pos, :])

        if not bland:
            if t_basic <= 1e-13:  # degenerate pivot: no objective progress
                stall += 1
                if stall >= STALL_WINDOW:
                    bland = True
            else:
                stall = 0
    raise InternalError(f"simplex did not terminate within {max_iter} iterations")
