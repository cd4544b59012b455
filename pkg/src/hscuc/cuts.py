"""Gomory mixed-integer cutting planes separated at the root relaxation.

The tree search never edits the constraint matrix, so rows generated here
are appended once, before branching starts, and every node relaxation then
solves the augmented system.  Each cut comes from the simplex tableau row
of a basic integer variable with a fractional value and is satisfied by
every integer-feasible point under the bounds that held at separation
time; the tree only ever tightens those bounds, so the rows stay valid
everywhere below the root.

Derivation, for a basic integer variable ``x_B`` with tableau row
``x_B + sum_j abar_j x_j = bbar`` over the nonbasic variables: shifting
every nonbasic to its active bound (``t_j = x_j - l_j`` at a lower bound,
``t_j = u_j - x_j`` at an upper bound) rewrites the row as
``x_B + sum_j a_j t_j = x_B*`` with every ``t_j >= 0``.  With
``f0 = frac(x_B*)`` the mixed-integer rounding of that row is

    sum_{j integer}    min(f_j, f0 (1 - f_j) / (1 - f0)) t_j
  + sum_{j continuous} (a_j if a_j >= 0 else -f0 a_j / (1 - f0)) t_j
  >= f0,        where f_j = frac(a_j),

violated by exactly ``f0`` at the separating vertex (every ``t_j`` is
zero there).  Unshifting the bounds and substituting each row's slack
definition ``s_r = b_r - a_r . x`` yields a plain ``>=`` row over the
structural variables, which is what this module returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .simplex import BASIC, NB_FREE, NB_LOWER, NB_UPPER, LpProblem, LpSolution

__all__ = ["CutRow", "separate_gmi", "extend_with_rows"]

# Fractionalities closer to an integer than this produce shallow, badly
# scaled cuts; skip those tableau rows entirely.
_MIN_FRACTIONALITY = 5e-3
# Tableau entries below this are noise from the factorization.
_COEF_ZERO = 1e-11
# Reject a finished cut whose coefficient magnitudes span more than this
# ratio; such rows destabilise later factorizations.
_MAX_DYNAMISM = 1e7
# Reject cuts denser than this: each nonzero is paid for in every node LP.
_MAX_NNZ = 400


@dataclass
class CutRow:
    """One ``coefs . x >= rhs`` row over structural variables."""

    coefs: dict[int, float]
    rhs: float

    def signature(self) -> tuple:
        """Scale-invariant key used to drop duplicate cuts across rounds."""
        scale = max(abs(v) for v in self.coefs.values())
        items = tuple(
            (j, round(v / scale, 9)) for j, v in sorted(self.coefs.items())
        )
        return (round(self.rhs / scale, 9), items)


def separate_gmi(
    prob: LpProblem,
    sol: LpSolution,
    lo: np.ndarray,
    up: np.ndarray,
    int_mask: np.ndarray,
    *,
    max_cuts: int = 40,
    int_tol: float = 1e-6,
) -> list[CutRow]:
    """Derive Gomory mixed-integer cuts from an optimal basic solution.

    ``lo``/``up`` must be the exact bound arrays the solve used (length
    ``n + m``); the shift step leans on every nonbasic variable sitting on
    one of them.  Returns at most ``max_cuts`` rows, most fractional
    source variable first.
    """
    if sol.basis is None or not sol.point:
        return []
    n, m = prob.n, prob.m
    basic = sol.basis.basic
    vstat = sol.basis.vstat

    x = np.zeros(n)
    for j, v in sol.point.items():
        x[j] = v
    xfull = np.concatenate([x, prob.b - prob.A @ x])

    frac = x - np.floor(x)
    dist = np.minimum(frac, 1.0 - frac)
    candidates = [
        j
        for j in np.nonzero(int_mask)[0]
        if dist[j] > int_tol and vstat[j] == BASIC
        and _MIN_FRACTIONALITY <= frac[j] <= 1.0 - _MIN_FRACTIONALITY
    ]
    if not candidates:
        return []
    candidates.sort(key=lambda j: (-dist[j], j))

    row_of = {int(basic[i]): i for i in range(m)}
    try:
        lu = scipy.sparse.linalg.splu(_basis_matrix(prob, basic).tocsc())
    except (RuntimeError, ValueError):
        return []
    A_csr = prob.A.tocsr()

    nonbasic = np.nonzero(vstat != BASIC)[0]
    cuts: list[CutRow] = []
    seen: set[tuple] = set()
    for j in candidates:
        if len(cuts) >= max_cuts:
            break
        e = np.zeros(m)
        e[row_of[int(j)]] = 1.0
        yrow = lu.solve(e, trans="T")
        tableau = np.concatenate([prob.AT @ yrow, yrow])
        cut = _gmi_from_row(
            j, tableau, xfull, lo, up, vstat, int_mask, nonbasic, frac[j]
        )
        if cut is None:
            continue
        cut = _substitute_slacks(cut, n, A_csr, prob.b)
        if cut is None or not _acceptable(cut, x):
            continue
        sig = cut.signature()
        if sig in seen:
            continue
        seen.add(sig)
        cuts.append(cut)
    return cuts


def _basis_matrix(prob: LpProblem, basic: np.ndarray) -> scipy.sparse.coo_matrix:
    rows, cols, vals = [], [], []
    A = prob.A
    for i, j in enumerate(basic):
        j = int(j)
        if j < prob.n:
            s, e = A.indptr[j], A.indptr[j + 1]
            rows.extend(A.indices[s:e])
            cols.extend([i] * (e - s))
            vals.extend(A.data[s:e])
        else:
            rows.append(j - prob.n)
            cols.append(i)
            vals.append(1.0)
    return scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(prob.m, prob.m))


def _gmi_from_row(
    source: int,
    tableau: np.ndarray,
    xfull: np.ndarray,
    lo: np.ndarray,
    up: np.ndarray,
    vstat: np.ndarray,
    int_mask: np.ndarray,
    nonbasic: np.ndarray,
    f0: float,
) -> CutRow | None:
    """Round one tableau row; returns the cut over shifted-then-unshifted
    original variables (slack indices still present)."""
    n = int_mask.shape[0]
    ratio = f0 / (1.0 - f0)
    coefs: dict[int, float] = {}
    rhs = f0
    for k in nonbasic:
        k = int(k)
        abar = tableau[k]
        status = vstat[k]
        if status == NB_FREE:
            # A free nonbasic sits at no bound, so the row cannot be
            # shifted into t >= 0 form; give up unless it is absent.
            if abs(abar) > _COEF_ZERO:
                return None
            continue
        at_lower = status == NB_LOWER
        bound = lo[k] if at_lower else up[k]
        if not math.isfinite(bound):
            return None
        if lo[k] == up[k]:
            continue  # pinned variable: t is identically zero
        a_sh = abar if at_lower else -abar
        integral = (
            k < n
            and int_mask[k]
            and abs(bound - round(bound)) <= 1e-9
        )
        if integral:
            f_k = a_sh - math.floor(a_sh)
            gamma = f_k if f_k <= f0 else ratio * (1.0 - f_k)
        else:
            if abs(a_sh) <= _COEF_ZERO:
                continue
            gamma = a_sh if a_sh >= 0.0 else -ratio * a_sh
        if gamma <= _COEF_ZERO:
            # Dropping a tiny nonnegative term weakens the cut only if the
            # right side shrinks with it by the term's largest reach.
            reach = gamma * (up[k] - lo[k])
            if math.isfinite(reach) and reach <= 1e-9:
                rhs -= reach
                continue
            if gamma == 0.0:
                continue
        # Unshift t back to the original variable.
        if at_lower:
            coefs[k] = coefs.get(k, 0.0) + gamma
            rhs += gamma * bound
        else:
            coefs[k] = coefs.get(k, 0.0) - gamma
            rhs -= gamma * bound
    return CutRow(coefs, rhs)


def _substitute_slacks(
    cut: CutRow, n: int, A_csr: scipy.sparse.csr_matrix, b: np.ndarray
) -> CutRow | None:
    """Rewrite slack-variable terms through their defining rows."""
    coefs: dict[int, float] = {}
    rhs = cut.rhs
    for k, sigma in cut.coefs.items():
        if k < n:
            coefs[k] = coefs.get(k, 0.0) + sigma
            continue
        r = k - n
        rhs -= sigma * b[r]
        s, e = A_csr.indptr[r], A_csr.indptr[r + 1]
        for idx in range(s, e):
            kk = int(A_csr.indices[idx])
            coefs[kk] = coefs.get(kk, 0.0) - sigma * A_csr.data[idx]
    coefs = {k: v for k, v in coefs.items() if abs(v) > 1e-13}
    if not coefs:
        return None
    return CutRow(coefs, rhs)


def _acceptable(cut: CutRow, x: np.ndarray) -> bool:
    mags = [abs(v) for v in cut.coefs.values()]
    largest, smallest = max(mags), min(mags)
    if len(cut.coefs) > _MAX_NNZ or largest > 1e8 or abs(cut.rhs) > 1e10:
        return False
    if largest / smallest > _MAX_DYNAMISM:
        return False
    activity = sum(v * x[k] for k, v in cut.coefs.items())
    violation = cut.rhs - activity
    # A healthy GMI row is violated by about f0 at its own vertex; anything
    # materially off means the slack substitution degraded numerically.
    return violation > 1e-4


def extend_with_rows(prob: LpProblem, cuts: list[CutRow]) -> LpProblem:
    """A new problem with ``cuts`` appended as ``>=`` rows.

    Cost, bounds, and the structural column space are shared with ``prob``;
    only the row data grows.  Callers must refresh anything derived from
    ``full_bounds`` because the slack block is longer.
    """
    k = len(cuts)
    ext = object.__new__(LpProblem)
    ext.n = prob.n
    ext.m = prob.m + k
    ext.c = prob.c
    ext.c0 = prob.c0
    ext.lower = prob.lower
    ext.upper = prob.upper
    ext.b = np.concatenate([prob.b, [cut.rhs for cut in cuts]])
    ext.slack_lower = np.concatenate([prob.slack_lower, np.full(k, -math.inf)])
    ext.slack_upper = np.concatenate([prob.slack_upper, np.zeros(k)])
    rows, cols, vals = [], [], []
    for i, cut in enumerate(cuts):
        for j, v in cut.coefs.items():
            rows.append(i)
            cols.append(j)
            vals.append(v)
    block = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(k, prob.n))
    ext.A = scipy.sparse.vstack([prob.A, block]).tocsc()
    ext.AT = ext.A.T.tocsr()
    return ext
