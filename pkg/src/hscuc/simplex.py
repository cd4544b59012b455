"""Bounded-variable revised simplex.

Solves  min c'x  s.t.  A x {<=,>=,=} b,  l <= x <= u  with finite or
infinite bounds.  Rows are converted once to  A x + s = b  with one
slack per row whose bounds encode the sense:

* ``<=`` rows: s in [0, +inf)
* ``>=`` rows: s in (-inf, 0]
* ``=``  rows: s fixed at 0

The basis inverse is never formed.  A pluggable factorization of the
basis matrix (dense LAPACK LU for small bases, SuperLU for large ones)
is refreshed periodically and bridged between refreshes by product-form
eta updates.  Phase 1 minimizes total bound infeasibility of the basic
variables with shifted working bounds, so no artificial variables are
ever added and warm starts from a sibling basis are cheap.

Pricing is Dantzig (most negative reduced cost) with an automatic
switch to Bland's rule during degenerate stretches.  The ratio test is
a two-pass Harris variant that trades a bounded feasibility slip of at
most ``feas_tol`` for larger pivot elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from hscuc.milp import MilpModel

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# nonbasic-at-lower, nonbasic-at-upper, basic, nonbasic-free (at zero)
NB_LOWER, NB_UPPER, BASIC, NB_FREE = 0, 1, 2, 3

_D_TOL = 1e-7          # dual feasibility tolerance on reduced costs
_PIV_TOL = 1e-9        # smallest acceptable pivot element
_DEGEN_STEP = 1e-10    # steps below this count toward the degeneracy streak


class NumericalBreakdownError(RuntimeError):
    """Factorization or pivoting failed beyond repair.

    ``history`` holds the most recent pivots as tuples
    (iteration, entering, leaving, pivot value, step) to aid diagnosis.
    """

    def __init__(self, message: str, history: list | None = None):
        super().__init__(message)
        self.history = history or []


@dataclass
class Basis:
    """Opaque warm-start handle: which variable occupies each basis row."""

    basic: np.ndarray   # (m,) variable index per basis position
    vstat: np.ndarray   # (n + m,) status code per variable

    def copy(self) -> "Basis":
        return Basis(self.basic.copy(), self.vstat.copy())


@dataclass
class LpSolution:
    status: str
    objective: float = math.nan
    dual_objective: float = math.nan
    point: dict[int, float] = field(default_factory=dict)
    duals: dict[int, float] = field(default_factory=dict)
    reduced_costs: dict[int, float] = field(default_factory=dict)
    iterations: int = 0
    primal_residual: float = 0.0
    basis: Basis | None = None

    @property
    def duality_gap(self) -> float:
        return abs(self.objective - self.dual_objective)


class LpProblem:
    """Arrays extracted once from a :class:`MilpModel`.

    Shared across many solves with different bounds (branch and bound
    fixes binaries by overriding bounds, never by editing the matrix).
    """

    def __init__(self, model: MilpModel):
        n = model.num_variables()
        m = model.num_constraints()
        self.n = n
        self.m = m
        self.c = np.zeros(n)
        for vid, coef in model.objective.items():
            self.c[vid] = coef
        self.c0 = model.objective_constant
        self.lower = np.array([v.lower for v in model.variables], dtype=float)
        self.upper = np.array([v.upper for v in model.variables], dtype=float)
        self.b = np.array([c.rhs for c in model.constraints], dtype=float)
        self.slack_lower = np.empty(m)
        self.slack_upper = np.empty(m)
        for i, con in enumerate(model.constraints):
            if con.sense == "<=":
                self.slack_lower[i], self.slack_upper[i] = 0.0, math.inf
            elif con.sense == ">=":
                self.slack_lower[i], self.slack_upper[i] = -math.inf, 0.0
            else:
                self.slack_lower[i], self.slack_upper[i] = 0.0, 0.0
        rows, cols, vals = [], [], []
        for con in model.constraints:
            for vid, coef in con.terms:
                rows.append(con.id)
                cols.append(vid)
                vals.append(coef)
        self.A = scipy.sparse.csc_matrix(
            (vals, (rows, cols)), shape=(m, n), dtype=float
        )
        self.AT = self.A.T.tocsr()

    def full_bounds(
        self,
        lower_overrides: dict[int, float] | None = None,
        upper_overrides: dict[int, float] | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        lo = np.concatenate([self.lower, self.slack_lower])
        up = np.concatenate([self.upper, self.slack_upper])
        if lower_overrides:
            for vid, v in lower_overrides.items():
                lo[vid] = v
        if upper_overrides:
            for vid, v in upper_overrides.items():
                up[vid] = v
        return lo, up


# -- basis factorization engines --------------------------------------------


class _SingularBasis(Exception):
    pass


class _BasisReset(Exception):
    """The working basis was discarded mid-phase; the caller must restart."""


class _DenseLU:
    def __init__(self, bmat: np.ndarray):
        m = bmat.shape[0]
        self.lu, self.piv = scipy.linalg.lu_factor(bmat, check_finite=False)
        diag = np.abs(np.diagonal(self.lu))
        if m and (not np.all(np.isfinite(diag)) or diag.min() <= 1e-12 * max(diag.max(), 1.0)):
            raise _SingularBasis

    def ftran_base(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve((self.lu, self.piv), rhs, check_finite=False)

    def btran_base(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve((self.lu, self.piv), rhs, trans=1, check_finite=False)


class _SparseLU:
    def __init__(self, bmat: scipy.sparse.csc_matrix):
        if np.diff(bmat.indptr).min(initial=1) == 0:
            # a structurally empty column would only make the factorization
            # noisy about the inevitable
            raise _SingularBasis
        try:
            self.lu = scipy.sparse.linalg.splu(
                bmat, permc_spec="COLAMD", options={"SymmetricMode": False}
            )
        except (RuntimeError, ValueError) as exc:  # SuperLU reports singularity this way
            raise _SingularBasis from exc

    def ftran_base(self, rhs: np.ndarray) -> np.ndarray:
        return self.lu.solve(rhs)

    def btran_base(self, rhs: np.ndarray) -> np.ndarray:
        return self.lu.solve(rhs, trans="T")


class _Factors:
    """LU of the current basis plus the eta file accumulated since."""

    def __init__(self, prob: LpProblem, basic: np.ndarray, lu_mode: str):
        m = prob.m
        self.etas: list[tuple[int, np.ndarray]] = []
        if lu_mode == "auto":
            lu_mode = "dense" if m <= 300 else "sparse"
        n = prob.n
        A = prob.A
        if lu_mode == "dense":
            bmat = np.zeros((m, m))
            for pos, j in enumerate(basic):
                if j < n:
                    s, e = A.indptr[j], A.indptr[j + 1]
                    bmat[A.indices[s:e], pos] = A.data[s:e]
                else:
                    bmat[j - n, pos] = 1.0
            self.engine = _DenseLU(bmat)
        else:
            counts = np.empty(m, dtype=np.int64)
            for pos, j in enumerate(basic):
                counts[pos] = A.indptr[j + 1] - A.indptr[j] if j < n else 1
            indptr = np.zeros(m + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            indices = np.empty(indptr[-1], dtype=np.int32)
            data = np.empty(indptr[-1])
            for pos, j in enumerate(basic):
                s = indptr[pos]
                if j < n:
                    a0, a1 = A.indptr[j], A.indptr[j + 1]
                    indices[s : s + a1 - a0] = A.indices[a0:a1]
                    data[s : s + a1 - a0] = A.data[a0:a1]
                else:
                    indices[s] = j - n
                    data[s] = 1.0
            bmat = scipy.sparse.csc_matrix((data, indices, indptr), shape=(m, m))
            self.engine = _SparseLU(bmat)

    def ftran(self, rhs: np.ndarray) -> np.ndarray:
        v = self.engine.ftran_base(rhs)
        for r, w in self.etas:
            t = v[r] / w[r]
            if t != 0.0:
                v -= t * w
            v[r] = t
        return v

    def btran(self, rhs: np.ndarray) -> np.ndarray:
        u = rhs.copy()
        for r, w in reversed(self.etas):
            ur = u[r]
            u[r] = 0.0
            u[r] = (ur - w @ u) / w[r]
        return self.engine.btran_base(u)

    def push_eta(self, r: int, w: np.ndarray) -> None:
        self.etas.append((r, w))


# -- the solver --------------------------------------------------------------


class _Simplex:
    def __init__(
        self,
        prob: LpProblem,
        lo: np.ndarray,
        up: np.ndarray,
        *,
        feas_tol: float,
        lu_mode: str,
        refactor_every: int,
        max_iterations: int,
        warm: Basis | None,
    ):
        self.prob = prob
        self.lo = lo
        self.up = up
        self.feas_tol = feas_tol
        self.lu_mode = lu_mode
        self.refactor_every = refactor_every
        self.max_iterations = max_iterations
        self.N = prob.n + prob.m

        self.iterations = 0
        self.pivots_since_refactor = 0
        self.degen_streak = 0
        self.bland = False
        self.in_phase2 = False
        self.perturb_active = False
        self.perturb_episodes = 0
        self.saved_lo: np.ndarray | None = None
        self.saved_up: np.ndarray | None = None
        self.history: list[tuple] = []
        self.factors: _Factors | None = None
        self.cost2 = np.concatenate([prob.c, np.zeros(prob.m)])

        if warm is not None and len(warm.basic) == prob.m and len(warm.vstat) == self.N:
            self.basic = warm.basic.copy()
            self.vstat = warm.vstat.copy()
            self._normalize_nonbasic()
        else:
            self._slack_basis()
        self.xval = np.zeros(self.N)
        self._set_nonbasic_values()
        self._refactor(recompute=True)

    # -- state helpers --------------------------------------------------

    def _slack_basis(self) -> None:
        n, m = self.prob.n, self.prob.m
        self.basic = np.arange(n, n + m, dtype=np.int64)
        self.vstat = np.empty(self.N, dtype=np.int8)
        self.vstat[n:] = BASIC
        for j in range(n):
            self.vstat[j] = self._nearest_bound_status(j)

    def _nearest_bound_status(self, j: int) -> int:
        lo, up = self.lo[j], self.up[j]
        if np.isfinite(lo):
            return NB_LOWER
        if np.isfinite(up):
            return NB_UPPER
        return NB_FREE

    def _normalize_nonbasic(self) -> None:
        # bounds may have changed since the warm basis was taken
        for j in range(self.N):
            st = self.vstat[j]
            if st == BASIC:
                continue
            if st == NB_LOWER and not np.isfinite(self.lo[j]):
                self.vstat[j] = self._nearest_bound_status(j)
            elif st == NB_UPPER and not np.isfinite(self.up[j]):
                self.vstat[j] = self._nearest_bound_status(j)
            elif st == NB_FREE and (np.isfinite(self.lo[j]) or np.isfinite(self.up[j])):
                self.vstat[j] = self._nearest_bound_status(j)

    def _set_nonbasic_values(self) -> None:
        for j in range(self.N):
            st = self.vstat[j]
            if st == NB_LOWER:
                self.xval[j] = self.lo[j]
            elif st == NB_UPPER:
                self.xval[j] = self.up[j]
            elif st == NB_FREE:
                self.xval[j] = 0.0

    def _refactor(self, recompute: bool, raise_on_reset: bool = False) -> None:
        tries = 0
        was_reset = False
        while True:
            try:
                self.factors = _Factors(self.prob, self.basic, self.lu_mode)
                break
            except _SingularBasis:
                tries += 1
                if tries > 1:
                    raise NumericalBreakdownError(
                        "basis singular even after reset", self.history
                    )
                # drop the working basis entirely and restart from slacks
                was_reset = True
                self._slack_basis()
                self._set_nonbasic_values()
        self.pivots_since_refactor = 0
        if recompute:
            self._recompute_basics()
        if was_reset and raise_on_reset:
            raise _BasisReset

    def _recompute_basics(self) -> None:
        prob = self.prob
        n, m = prob.n, prob.m
        x_struct = self.xval[:n].copy()
        x_struct[self.basic[self.basic < n]] = 0.0
        q = prob.b - prob.A @ x_struct
        slack_nb = self.vstat[n:] != BASIC
        if slack_nb.any():
            rows = np.nonzero(slack_nb)[0]
            q[rows] -= self.xval[n + rows]
        xb = self.factors.ftran(q)
        self.xval[self.basic] = xb

    # -- pricing ----------------------------------------------------------

    def _reduced_costs(self, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self.factors.btran(cost[self.basic])
        d = np.empty(self.N)
        d[: self.prob.n] = cost[: self.prob.n] - self.prob.AT @ y
        d[self.prob.n :] = cost[self.prob.n :] - y
        return d, y

    def _choose_entering(self, d: np.ndarray) -> int:
        viol = np.zeros(self.N)
        at_lo = self.vstat == NB_LOWER
        at_up = self.vstat == NB_UPPER
        free = self.vstat == NB_FREE
        movable_lo = at_lo & (self.up > self.lo)  # fixed variables never enter
        viol[movable_lo] = np.minimum(d[movable_lo], 0.0)
        viol[at_up & (self.up > self.lo)] = -np.maximum(d[at_up & (self.up > self.lo)], 0.0)
        viol[free] = -np.abs(d[free])
        viol_idx = np.nonzero(viol < -_D_TOL)[0]
        if viol_idx.size == 0:
            return -1
        if self.bland:
            return int(viol_idx[0])
        return int(viol_idx[np.argmin(viol[viol_idx])])

    # -- ratio test ---------------------------------------------------------

    def _ratio_test(
        self, q: int, sigma: float, w: np.ndarray, lo_b: np.ndarray, up_b: np.ndarray
    ) -> tuple[float, int, int]:
        """Largest step for entering q moving in direction sigma.

        Returns (step, blocking position or -1, blocking status).  Basic
        variable values respond as x_B -= sigma * step * w.  ``lo_b`` and
        ``up_b`` are the working bounds of the basic variables.
        """
        xb = self.xval[self.basic]
        move = sigma * w  # positive entries head toward their lower bound
        down = move > _PIV_TOL
        up_ = move < -_PIV_TOL
        ratios = np.full(self.prob.m, math.inf)
        bound_hit = np.full(self.prob.m, NB_LOWER, dtype=np.int8)
        fin_lo = down & np.isfinite(lo_b)
        ratios[fin_lo] = (xb[fin_lo] - lo_b[fin_lo]) / move[fin_lo]
        fin_up = up_ & np.isfinite(up_b)
        ratios[fin_up] = (up_b[fin_up] - xb[fin_up]) / (-move[fin_up])
        bound_hit[fin_up] = NB_UPPER
        np.maximum(ratios, 0.0, out=ratios)

        # Harris pass 1: relaxed minimum with a feasibility cushion
        slack_pad = self.feas_tol
        relaxed = np.full(self.prob.m, math.inf)
        relaxed[fin_lo] = (xb[fin_lo] - lo_b[fin_lo] + slack_pad) / move[fin_lo]
        relaxed[fin_up] = (up_b[fin_up] - xb[fin_up] + slack_pad) / (-move[fin_up])
        t_relaxed = relaxed.min() if self.prob.m else math.inf

        flip_limit = self.up[q] - self.lo[q]
        if not np.isfinite(t_relaxed):
            return flip_limit, -1, NB_LOWER
        # Harris pass 2: among candidates under the relaxed step, take the
        # largest pivot element for numerical stability
        cand = np.nonzero(ratios <= t_relaxed)[0]
        if cand.size == 0:
            cand = np.array([int(np.argmin(ratios))])
        r = int(cand[np.argmax(np.abs(w[cand]))])
        if ratios[r] > flip_limit:
            return flip_limit, -1, NB_LOWER
        return float(ratios[r]), r, int(bound_hit[r])

    # -- pivoting -------------------------------------------------------

    def _apply_step(self, q: int, sigma: float, step: float, w: np.ndarray) -> None:
        if step != 0.0:
            self.xval[self.basic] -= sigma * step * w
            self.xval[q] += sigma * step

    def _pivot(self, q: int, r: int, hit: int, w: np.ndarray, lo_b, up_b, step, sigma,
               raise_on_reset: bool) -> bool:
        """Swap entering q with the basic variable at position r."""
        if abs(w[r]) < _PIV_TOL:
            if self.pivots_since_refactor > 0:
                self._refactor(recompute=True, raise_on_reset=raise_on_reset)
                return False  # retry the iteration with fresh factors
            if abs(w[r]) < 1e-13:
                raise NumericalBreakdownError(
                    f"pivot element {w[r]:.3e} too small at iteration {self.iterations}",
                    self.history,
                )
        leaving = int(self.basic[r])
        self._apply_step(q, sigma, step, w)
        # snap the leaving variable onto the bound it reached; phase 1 works
        # with shifted bounds, so classify the status by the true bounds
        snap = lo_b[r] if hit == NB_LOWER else up_b[r]
        self.xval[leaving] = snap
        if snap == self.up[leaving] and snap != self.lo[leaving]:
            self.vstat[leaving] = NB_UPPER
        else:
            self.vstat[leaving] = NB_LOWER
        self.basic[r] = q
        self.vstat[q] = BASIC
        self.factors.push_eta(r, w)
        self.pivots_since_refactor += 1
        self.history.append((self.iterations, q, leaving, float(w[r]), float(step)))
        if len(self.history) > 32:
            self.history.pop(0)
        if self.pivots_since_refactor >= self.refactor_every:
            self._refactor(recompute=True, raise_on_reset=raise_on_reset)
        return True

    def _track_degeneracy(self, step: float) -> None:
        if step <= _DEGEN_STEP:
            self.degen_streak += 1
            if self.degen_streak >= 25:
                # A long run of zero-length steps means the vertex is massively
                # degenerate.  Nudging every finite bound outward by a tiny
                # random amount breaks the ties so ordinary pricing makes
                # progress again; Bland's rule stays as the guaranteed-finite
                # last resort once the perturbation budget is spent.
                if self.in_phase2 and self.perturb_episodes < 2:
                    self._apply_perturbation()
                    self.degen_streak = 0
                else:
                    self.bland = True
        else:
            self.degen_streak = 0
            self.bland = False

    def _apply_perturbation(self) -> None:
        if not self.perturb_active:
            # copy-on-write: callers share the bound arrays
            self.saved_lo, self.saved_up = self.lo, self.up
            self.lo, self.up = self.lo.copy(), self.up.copy()
            self.perturb_active = True
        self.perturb_episodes += 1
        rng = np.random.default_rng(90210 + self.perturb_episodes)
        fin = np.isfinite(self.lo)
        self.lo[fin] -= 1e-7 * (1.0 + np.abs(self.lo[fin])) * rng.uniform(0.5, 1.5, int(fin.sum()))
        fin = np.isfinite(self.up)
        self.up[fin] += 1e-7 * (1.0 + np.abs(self.up[fin])) * rng.uniform(0.5, 1.5, int(fin.sum()))
        self._set_nonbasic_values()
        self._recompute_basics()

    def _remove_perturbation(self) -> None:
        self.lo, self.up = self.saved_lo, self.saved_up
        self.saved_lo = self.saved_up = None
        self.perturb_active = False
        self._set_nonbasic_values()
        self._recompute_basics()

    # -- phase drivers ----------------------------------------------------

    def _basic_infeasibility(self) -> tuple[np.ndarray, np.ndarray]:
        xb = self.xval[self.basic]
        lo_b = self.lo[self.basic]
        up_b = self.up[self.basic]
        below = xb < lo_b - self.feas_tol
        above = xb > up_b + self.feas_tol
        return below, above

    def run_phase1(self) -> str:
        n, m = self.prob.n, self.prob.m
        self.in_phase2 = False
        cost = np.zeros(self.N)
        while True:
            below, above = self._basic_infeasibility()
            if not below.any() and not above.any():
                return OPTIMAL
            if self.iterations >= self.max_iterations:
                raise NumericalBreakdownError(
                    f"phase 1 iteration limit {self.max_iterations} reached", self.history
                )
            cost[:] = 0.0
            cost[self.basic[below]] = -1.0
            cost[self.basic[above]] = 1.0
            d, _ = self._reduced_costs(cost)
            q = self._choose_entering(d)
            if q < 0:
                if self.pivots_since_refactor > 0:
                    self._refactor(recompute=True)
                    continue
                return INFEASIBLE
            sigma = 1.0 if (self.vstat[q] == NB_LOWER or
                            (self.vstat[q] == NB_FREE and d[q] < 0)) else -1.0
            w = self.factors.ftran(self._column(q))
            # working bounds: an infeasible basic may travel freely on its
            # violated side and blocks where it would regain feasibility
            lo_b = self.lo[self.basic].copy()
            up_b = self.up[self.basic].copy()
            lo_b[below] = -math.inf
            up_b[below] = self.lo[self.basic[below]]
            lo_b[above] = self.up[self.basic[above]]
            up_b[above] = math.inf
            step, r, hit = self._ratio_test(q, sigma, w, lo_b, up_b)
            self.iterations += 1
            if r < 0:
                if not np.isfinite(step):
                    # no block and unlimited range cannot happen in phase 1:
                    # total infeasibility is bounded below by zero
                    raise NumericalBreakdownError(
                        "phase 1 ray with positive infeasibility", self.history
                    )
                self._flip(q, step, sigma, w)
                continue
            if self._pivot(q, r, hit, w, lo_b, up_b, step, sigma, raise_on_reset=False):
                self._track_degeneracy(step)

    def run_phase2(self) -> str:
        cost = self.cost2
        self.in_phase2 = True
        while True:
            if self.iterations >= self.max_iterations:
                raise NumericalBreakdownError(
                    f"phase 2 iteration limit {self.max_iterations} reached", self.history
                )
            d, _ = self._reduced_costs(cost)
            q = self._choose_entering(d)
            if q < 0:
                if self.perturb_active:
                    # optimal for the nudged bounds only: restore the exact
                    # box, pull any strayed basics back, and re-price
                    self._remove_perturbation()
                    below, above = self._basic_infeasibility()
                    if below.any() or above.any():
                        status = self.run_phase1()
                        self.in_phase2 = True
                        if status != OPTIMAL:
                            return status
                    continue
                return OPTIMAL
            sigma = 1.0 if (self.vstat[q] == NB_LOWER or
                            (self.vstat[q] == NB_FREE and d[q] < 0)) else -1.0
            w = self.factors.ftran(self._column(q))
            lo_b = self.lo[self.basic]
            up_b = self.up[self.basic]
            step, r, hit = self._ratio_test(q, sigma, w, lo_b, up_b)
            self.iterations += 1
            if r < 0:
                if not np.isfinite(step):
                    return UNBOUNDED
                self._flip(q, step, sigma, w)
                continue
            if self._pivot(q, r, hit, w, lo_b, up_b, step, sigma, raise_on_reset=True):
                self._track_degeneracy(step)

    def _flip(self, q: int, step: float, sigma: float, w: np.ndarray) -> None:
        """The entering variable travels all the way to its other bound."""
        self._apply_step(q, sigma, step, w)
        self.vstat[q] = NB_UPPER if self.vstat[q] == NB_LOWER else NB_LOWER
        self.xval[q] = self.up[q] if self.vstat[q] == NB_UPPER else self.lo[q]
        self._track_degeneracy(step)

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.prob.m)
        if j < self.prob.n:
            A = self.prob.A
            s, e = A.indptr[j], A.indptr[j + 1]
            col[A.indices[s:e]] = A.data[s:e]
        else:
            col[j - self.prob.n] = 1.0
        return col

    # -- wrap-up ----------------------------------------------------------

    def finish(self, status: str) -> LpSolution:
        # the driver guarantees fresh factors on the optimal path
        prob = self.prob
        n, m = prob.n, prob.m
        if status != OPTIMAL:
            return LpSolution(status=status, iterations=self.iterations,
                              basis=Basis(self.basic.copy(), self.vstat.copy()))
        d, y = self._reduced_costs(self.cost2)
        x = self.xval[:n]
        objective = float(prob.c @ x + prob.c0)
        nb = self.vstat != BASIC
        dual_objective = float(y @ prob.b + d[nb] @ self.xval[nb] + prob.c0)
        residual = prob.A @ x + self.xval[n:] - prob.b
        point = {j: float(x[j]) for j in range(n)}
        duals = {i: float(y[i]) for i in range(m)}
        rc = {j: float(d[j]) for j in range(n)}
        return LpSolution(
            status=OPTIMAL,
            objective=objective,
            dual_objective=dual_objective,
            point=point,
            duals=duals,
            reduced_costs=rc,
            iterations=self.iterations,
            primal_residual=float(np.abs(residual).max()) if m else 0.0,
            basis=Basis(self.basic.copy(), self.vstat.copy()),
        )


def solve_lp(
    prob: LpProblem,
    lo: np.ndarray | None = None,
    up: np.ndarray | None = None,
    *,
    feas_tol: float = 1e-6,
    lu_mode: str = "auto",
    refactor_every: int = 64,
    max_iterations: int | None = None,
    warm: Basis | None = None,
) -> LpSolution:
    """Solve the LP with optional bound overrides and warm-start basis."""
    if lo is None or up is None:
        base_lo, base_up = prob.full_bounds()
        lo = base_lo if lo is None else lo
        up = base_up if up is None else up
    if np.any(lo > up):
        if np.any(lo > up + feas_tol):
            return LpSolution(status=INFEASIBLE)
        # sub-tolerance crossings from upstream rounding: collapse to a point
        lo, up = lo.copy(), up.copy()
        cross = lo > up
        mid = 0.5 * (lo[cross] + up[cross])
        lo[cross] = mid
        up[cross] = mid
    if max_iterations is None:
        max_iterations = 200 * (prob.m + prob.n) + 10_000

    if prob.m == 0:
        return _solve_boxed(prob, lo, up)

    worker = _Simplex(
        prob, lo, up,
        feas_tol=feas_tol, lu_mode=lu_mode, refactor_every=refactor_every,
        max_iterations=max_iterations, warm=warm,
    )
    # Drive to optimality, then confirm primal feasibility and pricing on a
    # fresh factorization.  Harris steps and eta drift can leave a basic
    # value slightly past its bound or a stale reduced cost; a bounded
    # number of repair rounds cleans that up.
    attempts = 0
    while True:
        attempts += 1
        if attempts > 6:
            raise NumericalBreakdownError(
                "repeated feasibility or pricing repairs did not converge",
                worker.history,
            )
        try:
            status = worker.run_phase1()
            if status != OPTIMAL:
                break
            status = worker.run_phase2()
            if status != OPTIMAL:
                break
            if worker.pivots_since_refactor > 0:
                worker._refactor(recompute=True, raise_on_reset=True)
            below, above = worker._basic_infeasibility()
            if below.any() or above.any():
                continue
            d, _ = worker._reduced_costs(worker.cost2)
            if worker._choose_entering(d) >= 0:
                continue
            break
        except _BasisReset:
            continue
    return worker.finish(status)


def _solve_boxed(prob: LpProblem, lo: np.ndarray, up: np.ndarray) -> LpSolution:
    """Degenerate case with no rows: minimize each variable independently."""
    n = prob.n
    x = np.zeros(n)
    for j in range(n):
        c = prob.c[j]
        if c > 0:
            if not np.isfinite(lo[j]):
                return LpSolution(status=UNBOUNDED)
            x[j] = lo[j]
        elif c < 0:
            if not np.isfinite(up[j]):
                return LpSolution(status=UNBOUNDED)
            x[j] = up[j]
        else:
            x[j] = lo[j] if np.isfinite(lo[j]) else (up[j] if np.isfinite(up[j]) else 0.0)
    obj = float(prob.c @ x + prob.c0)
    return LpSolution(
        status=OPTIMAL, objective=obj, dual_objective=obj,
        point={j: float(x[j]) for j in range(n)},
        reduced_costs={j: float(prob.c[j]) for j in range(n)},
    )


def solve_model_lp(model: MilpModel, **kwargs) -> LpSolution:
    """Convenience wrapper: extract arrays and solve the LP relaxation."""
    return solve_lp(LpProblem(model), **kwargs)
