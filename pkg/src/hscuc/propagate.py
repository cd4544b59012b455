"""Activity-based bound propagation over the rows of an LP.

Given variable boxes and the row system ``A x + s = b`` with boxed
slacks, each row confines its activity ``a . x`` to an interval.  Fixing
or tightening one variable therefore tightens the residual interval left
for every other variable in the row, and rounding the implied bounds of
binaries to the nearest integer turns small tightenings into hard fixes
that feed back into neighbouring rows.  Chasing that feedback to a fixed
point is dramatically cheaper than a simplex solve and proves many of
the same infeasibilities, which makes it the workhorse both for probing
(would fixing this binary strand the rest of the system?) and as a node
presolve in the tree search (a branch whose implications empty some box
never pays for an LP).

All deductions are sound for every integer point inside the given boxes:
interval arithmetic never discards a feasible point, and the integral
rounding step only discards fractional values of integer variables.
"""

from __future__ import annotations

import math

import numpy as np

from .simplex import LpProblem

__all__ = ["Propagator"]

_BIG = 1e30    # bounds beyond this are treated as infinite
_HUGE = _BIG / 2  # derived quantities beyond this carry no information


class Propagator:
    """Reusable propagation engine bound to one :class:`LpProblem`.

    The constructor extracts the row structure once; :meth:`run` then
    works on any bounds arrays for that problem, so one instance serves
    every node of a tree search.
    """

    def __init__(self, prob: LpProblem):
        self.n = prob.n
        self.m = prob.m
        A = prob.A.tocsr()
        self.cols = A.indices.astype(np.int64)
        self.vals = A.data.copy()
        self.rows = np.repeat(np.arange(self.m, dtype=np.int64),
                              np.diff(A.indptr))
        self.pos = self.vals > 0.0
        # Row activity interval [rlo, rup]: a.x = b - s with s boxed.
        self.rlo = prob.b - prob.slack_upper
        self.rup = prob.b - prob.slack_lower
        # entry order grouped by column, for per-variable reductions
        order = np.argsort(self.cols, kind="stable")
        counts = np.bincount(self.cols, minlength=self.n)
        self.col_order = order
        self.col_nonempty = np.flatnonzero(counts > 0)
        indptr = np.concatenate([[0], np.cumsum(counts)])
        self.col_starts = indptr[self.col_nonempty]

    def run(
        self,
        lo: np.ndarray,
        up: np.ndarray,
        int_mask: np.ndarray,
        *,
        feas_tol: float = 1e-7,
        int_tol: float = 1e-6,
        max_rounds: int = 30,
    ) -> bool:
        """Tighten ``lo``/``up`` in place; ``False`` means provably empty.

        ``lo``/``up`` are full-length (variables then slacks) arrays as
        used by the LP solver; only the variable part is modified.
        """
        n = self.n
        cols, vals, rows, pos = self.cols, self.vals, self.rows, self.pos
        xlo = lo[:n]
        xup = up[:n]
        if np.any(xlo > xup + feas_tol):
            return False
        if not len(vals):
            return True
        for _ in range(max_rounds):
            # An unbounded variable contributes no finite amount to a row
            # side; summing a stand-in like 1e30 instead would absorb every
            # real contribution in the row (float addition at that scale
            # has ulp ~1e14).  So each side sums only finite contributions
            # and carries a separate count of the infinite ones.
            blo = xlo[cols]
            bup = xup[cols]
            base_min = np.where(pos, blo, bup)
            base_max = np.where(pos, bup, blo)
            inf_min = np.abs(base_min) >= _BIG
            inf_max = np.abs(base_max) >= _BIG
            e_lo = vals * np.where(inf_min, 0.0, base_min)
            e_up = vals * np.where(inf_max, 0.0, base_max)
            min_act = np.bincount(rows, weights=e_lo, minlength=self.m)
            max_act = np.bincount(rows, weights=e_up, minlength=self.m)
            ninf_min = np.bincount(rows[inf_min], minlength=self.m)
            ninf_max = np.bincount(rows[inf_max], minlength=self.m)
            closed_min = ninf_min == 0
            closed_max = ninf_max == 0
            if np.any(closed_min
                      & (min_act > self.rup + feas_tol * (1.0 + np.abs(self.rup)))):
                return False
            if np.any(closed_max
                      & (max_act < self.rlo - feas_tol * (1.0 + np.abs(self.rlo)))):
                return False
            # The residual of an entry is finite when every *other* entry
            # in the row is finite on that side: either the whole side is,
            # or this entry is the side's single infinite one.
            usable_min = closed_min[rows] | (ninf_min[rows] == 1) & inf_min
            usable_max = closed_max[rows] | (ninf_max[rows] == 1) & inf_max
            res_min = min_act[rows] - e_lo
            res_max = max_act[rows] - e_up
            # a > 0:  x <= (rup - res_min)/a   and   x >= (rlo - res_max)/a
            # a < 0:  the two candidates swap roles
            with np.errstate(invalid="ignore"):
                cand_hi = (self.rup[rows] - res_min) / vals
                cand_lo = (self.rlo[rows] - res_max) / vals
            new_up = np.where(pos, cand_hi, cand_lo)
            new_lo = np.where(pos, cand_lo, cand_hi)
            ok_up = np.where(pos, usable_min, usable_max) & (new_up < _HUGE)
            ok_lo = np.where(pos, usable_max, usable_min) & (new_lo > -_HUGE)
            # reduce per column over the column-grouped entry order
            su = np.where(ok_up, new_up, math.inf)[self.col_order]
            sl = np.where(ok_lo, new_lo, -math.inf)[self.col_order]
            tight_up = np.full(n, math.inf)
            tight_lo = np.full(n, -math.inf)
            tight_up[self.col_nonempty] = np.minimum.reduceat(su, self.col_starts)
            tight_lo[self.col_nonempty] = np.maximum.reduceat(sl, self.col_starts)
            # Never sharpen by less than the feasibility slack: that only
            # invites oscillation from rounding noise.
            improve_up = tight_up + feas_tol * (1.0 + np.abs(tight_up)) < xup
            improve_lo = tight_lo - feas_tol * (1.0 + np.abs(tight_lo)) > xlo
            if not (improve_up.any() or improve_lo.any()):
                return True
            xup[improve_up] = tight_up[improve_up]
            xlo[improve_lo] = tight_lo[improve_lo]
            # Integral rounding: an integer bound moves to the nearest
            # admissible integer.  Floor/ceil also scrubs the one-ulp
            # overshoot a division like 0.16/0.16 can leave behind.
            frac = int_mask & (np.abs(xup) < _BIG)
            xup[frac] = np.floor(xup[frac] + int_tol)
            frac = int_mask & (np.abs(xlo) < _BIG)
            xlo[frac] = np.ceil(xlo[frac] - int_tol)
            if np.any(xlo > xup + feas_tol):
                return False
            # A sub-tolerance crossing is numerical noise; weakening the
            # lower bound back onto the upper keeps the box well formed.
            cross = xlo > xup
            if cross.any():
                xlo[cross] = xup[cross]
        return True
