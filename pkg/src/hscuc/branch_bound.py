"""Branch and bound for MILPs whose integer variables are all binary.

The LP relaxation machinery comes from :mod:`hscuc.simplex`.  Branching
fixes one binary per node by overriding its bounds, so every node shares
the same constraint matrix and child solves warm-start from the parent
basis.  Node selection is depth-first plunging until the first incumbent
is found, then best-bound.  Candidate selection is most-fractional or
pseudo-cost, both with deterministic tie-breaks (lowest variable id).

Every accepted incumbent is polished by re-solving the LP with its
binary pattern fixed, which snaps the binaries to exact 0/1 and
re-optimizes the continuous part; the reported point therefore satisfies
the model rows to factorization accuracy rather than merely to the
integrality tolerance.
"""

from __future__ import annotations

import copy
import heapq
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from hscuc.cuts import extend_with_rows, separate_gmi
from hscuc.milp import MilpModel
from hscuc.propagate import Propagator
from hscuc.simplex import (
    BASIC,
    Basis,
    LpProblem,
    LpSolution,
    NumericalBreakdownError,
    OPTIMAL,
    INFEASIBLE,
    UNBOUNDED,
    solve_lp,
)

BRANCH_RULES = ("most_fractional", "pseudo_cost")

# solution statuses
GAP_LIMIT = "gap_limit"
FEASIBLE = "feasible"
NODE_LIMIT = "node_limit"
TIME_LIMIT = "time_limit"


@dataclass
class SolveOptions:
    """Tolerances and limits for the MILP search.

    ``deterministic_seed`` is accepted for interface stability; the
    current algorithms contain no randomized component, so two runs with
    any seed produce identical output.
    """

    gap_tol: float = 1e-4
    int_tol: float = 1e-6
    feas_tol: float = 1e-6
    dual_gap_tol: float = 1e-6
    node_limit: int = 1_000_000
    time_limit_seconds: float | None = None
    branch_rule: str = "pseudo_cost"
    deterministic_seed: int = 0
    lu_mode: str = "auto"
    refactor_every: int = 64
    probe_binaries: bool = True
    probe_iteration_cap: int = 150
    probe_fractional_limit: int = 48
    cut_rounds: int = 8
    cuts_per_round: int = 40
    neighborhood_search: bool = True
    trace_nodes: bool = False
    verbose: int = 0

    def __post_init__(self):
        if self.branch_rule not in BRANCH_RULES:
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")


@dataclass
class MilpSolution:
    status: str
    objective: float = math.nan
    best_bound: float = math.nan
    point: dict[int, float] = field(default_factory=dict)
    gap: float = math.nan
    nodes: int = 0
    lp_iterations: int = 0
    incumbent_history: list[tuple[int, float]] = field(default_factory=list)
    node_trace: list[tuple[int, int, float, float, float]] = field(default_factory=list)


@dataclass
class _Node:
    seq: int
    depth: int
    bound_est: float
    lo_over: dict[int, float]
    up_over: dict[int, float]
    basis: Basis | None
    branch_var: int = -1
    branch_up: bool = False
    parent_obj: float = math.nan
    parent_frac: float = 0.0
    closed: bool = False

    def __lt__(self, other: "_Node") -> bool:
        return self.seq < other.seq


class _PseudoCosts:
    """Average objective degradation per unit of fraction removed."""

    def __init__(self, binary_ids: list[int]):
        self.down_sum = {j: 0.0 for j in binary_ids}
        self.down_cnt = {j: 0 for j in binary_ids}
        self.up_sum = {j: 0.0 for j in binary_ids}
        self.up_cnt = {j: 0 for j in binary_ids}

    def record(self, j: int, up: bool, degradation: float, frac_moved: float) -> None:
        rate = degradation / max(frac_moved, 1e-9)
        if up:
            self.up_sum[j] += rate
            self.up_cnt[j] += 1
        else:
            self.down_sum[j] += rate
            self.down_cnt[j] += 1

    def estimate(self, j: int, up: bool) -> float:
        s, k = (self.up_sum, self.up_cnt) if up else (self.down_sum, self.down_cnt)
        if k[j] > 0:
            return s[j] / k[j]
        total = sum(self.up_cnt.values()) + sum(self.down_cnt.values())
        if total > 0:
            grand = sum(self.up_sum.values()) + sum(self.down_sum.values())
            return grand / total
        return 1.0


def _select_branch_var(
    rule: str, fractional: list[tuple[int, float]], pseudo: _PseudoCosts
) -> tuple[int, float]:
    """Pick the binary to branch on; ties go to the lowest variable id."""
    if rule == "most_fractional":
        best = None
        for j, f in fractional:
            score = min(f, 1.0 - f)
            if best is None or score > best[0] + 1e-12:
                best = (score, j, f)
        return best[1], best[2]
    best = None
    for j, f in fractional:
        score = max(pseudo.estimate(j, False) * f, 1e-6) * max(
            pseudo.estimate(j, True) * (1.0 - f), 1e-6
        )
        if best is None or score > best[0] + 1e-12:
            best = (score, j, f)
    return best[1], best[2]


def solve_milp(model: MilpModel, options: SolveOptions | None = None) -> MilpSolution:
    opts = options or SolveOptions()
    prob = LpProblem(model)
    binaries = model.binary_ids()
    t_start = time.monotonic()

    def lp(node_lo, node_up, warm):
        return solve_lp(
            prob, node_lo, node_up, warm=warm,
            feas_tol=opts.feas_tol, lu_mode=opts.lu_mode,
            refactor_every=opts.refactor_every,
        )

    int_mask = np.zeros(prob.n, dtype=bool)
    if binaries:
        int_mask[binaries] = True
    propagator = Propagator(prob)

    base_lo, base_up = prob.full_bounds()
    # Propagating the base box before anything else both tightens the root
    # relaxation (binaries snapped off a fractional range raise its value)
    # and can prove integer infeasibility outright.
    if not propagator.run(base_lo, base_up, int_mask,
                          feas_tol=opts.feas_tol, int_tol=opts.int_tol):
        return MilpSolution(status=INFEASIBLE, nodes=1, lp_iterations=0)
    root_lp = lp(base_lo, base_up, None)
    lp_iterations = root_lp.iterations
    if root_lp.status == INFEASIBLE:
        return MilpSolution(status=INFEASIBLE, nodes=1, lp_iterations=lp_iterations)
    if root_lp.status == UNBOUNDED:
        # Binaries are boxed, so a recession ray never moves them: the
        # problem is genuinely unbounded only if some integer point is
        # feasible at all.  Decide with a zero-objective search.
        if model.objective and binaries:
            probe = copy.copy(model)
            probe.objective = {}
            probe.objective_constant = 0.0
            feas = solve_milp(probe, opts)
            if feas.status == INFEASIBLE:
                return MilpSolution(
                    status=INFEASIBLE, nodes=1 + feas.nodes,
                    lp_iterations=lp_iterations + feas.lp_iterations,
                )
        return MilpSolution(status=UNBOUNDED, nodes=1, lp_iterations=lp_iterations)

    if not binaries:
        return MilpSolution(
            status=OPTIMAL, objective=root_lp.objective, best_bound=root_lp.objective,
            point=root_lp.point, gap=0.0, nodes=1, lp_iterations=lp_iterations,
        )

    inc_obj = math.inf
    inc_point: dict[int, float] | None = None
    inc_basis: Basis | None = None
    incumbent_history: list[tuple[int, float]] = []
    trace: list[tuple[int, int, float, float, float]] = []
    pseudo = _PseudoCosts(binaries)
    nodes_processed = 1
    heap: list[tuple[float, _Node]] = []

    # Root probing: tentatively close each binary and propagate the
    # implications; a side whose propagation empties some box is fixed
    # away for good.  Fixes cascade (a unit whose ramp rate can never
    # absorb a shutdown strands its whole commitment row), and each fix is
    # written back through another propagation pass so later probes start
    # from the tightened box.  Branching on such a variable later would
    # spawn a subtree whose LPs stay feasible while every integral
    # completion is not; closing it here costs interval arithmetic only.
    probe_pairs: dict[int, tuple[float, float]] = {}
    probe_lift = -math.inf
    if opts.probe_binaries:
        probed_fixed = 0
        for _ in range(3):
            changed = False
            for j in binaries:
                if base_lo[j] == base_up[j]:
                    continue
                x = root_lp.point[j]
                if x <= opts.int_tol:
                    sides: tuple[float, ...] = (1.0,)
                elif x >= 1.0 - opts.int_tol:
                    sides = (0.0,)
                else:
                    sides = (0.0, 1.0)
                for side in sides:
                    trial_lo, trial_up = base_lo.copy(), base_up.copy()
                    trial_lo[j] = trial_up[j] = side
                    if not propagator.run(trial_lo, trial_up, int_mask,
                                          feas_tol=opts.feas_tol,
                                          int_tol=opts.int_tol,
                                          max_rounds=12):
                        base_lo[j] = base_up[j] = 1.0 - side
                        if not propagator.run(base_lo, base_up, int_mask,
                                              feas_tol=opts.feas_tol,
                                              int_tol=opts.int_tol):
                            return MilpSolution(status=INFEASIBLE, nodes=1,
                                                lp_iterations=lp_iterations)
                        probed_fixed += 1
                        changed = True
                        break
            if not changed:
                break
        if probed_fixed:
            refreshed = lp(base_lo, base_up, root_lp.basis)
            lp_iterations += refreshed.iterations
            if refreshed.status == INFEASIBLE:
                return MilpSolution(status=INFEASIBLE, nodes=1,
                                    lp_iterations=lp_iterations)
            if refreshed.status == OPTIMAL:
                root_lp = refreshed

        # A few LP probes on the most fractional binaries are still worth
        # buying: the pair of one-side-fixed LP values prices both moves
        # exactly, seeding the branching statistics, and the weaker side
        # of any pair is a valid bound on every integral point.
        frac_rank = sorted(
            (j for j in binaries
             if base_lo[j] != base_up[j]
             and min(root_lp.point[j], 1.0 - root_lp.point[j]) > opts.int_tol),
            key=lambda j: (-min(root_lp.point[j], 1.0 - root_lp.point[j]), j),
        )
        for j in frac_rank[: opts.probe_fractional_limit]:
            found: dict[float, float] = {}
            for side in (0.0, 1.0):
                old_lo, old_up = base_lo[j], base_up[j]
                base_lo[j] = base_up[j] = side
                try:
                    trial = solve_lp(
                        prob, base_lo, base_up, warm=root_lp.basis,
                        feas_tol=opts.feas_tol, lu_mode=opts.lu_mode,
                        refactor_every=opts.refactor_every,
                        max_iterations=opts.probe_iteration_cap,
                    )
                except NumericalBreakdownError:
                    base_lo[j], base_up[j] = old_lo, old_up
                    continue
                lp_iterations += trial.iterations
                base_lo[j], base_up[j] = old_lo, old_up
                if trial.status == INFEASIBLE:
                    found[side] = math.inf
                    base_lo[j] = base_up[j] = 1.0 - side
                    probed_fixed += 1
                    break
                if trial.status == OPTIMAL:
                    found[side] = trial.objective
            if len(found) == 2:
                probe_pairs[j] = (found[0.0], found[1.0])
        if probe_pairs:
            probe_lift = max(min(b0, b1) for b0, b1 in probe_pairs.values())
            for j, (b0, b1) in probe_pairs.items():
                x = root_lp.point[j]
                if math.isfinite(b0):
                    pseudo.record(j, False, max(b0 - root_lp.objective, 0.0), x)
                if math.isfinite(b1):
                    pseudo.record(j, True, max(b1 - root_lp.objective, 0.0), 1.0 - x)
        if opts.verbose:
            print(f"probing fixed {probed_fixed} binaries, root bound "
                  f"{max(root_lp.objective, probe_lift):.6f}", flush=True)

    # Root cutting planes: mixed-integer rounding of fractional tableau
    # rows tightens the relaxation once, before any branching.  Every node
    # inherits the appended rows, so the bound the tree must lift toward
    # the incumbent starts much closer to integral.  Separation runs after
    # probing on purpose: the tableau of the probe-tightened relaxation
    # yields stronger rows, and the rows stay valid below the root because
    # the probe fixes themselves hold for every integral point.  Rows are
    # only kept while the augmented LP stays cleanly solvable; on any
    # wobble the previous problem is restored, because cutting is optional
    # and branching is not.
    if opts.cut_rounds > 0 and root_lp.status == OPTIMAL:
        stall = 0
        for _ in range(opts.cut_rounds):
            round_started = time.perf_counter()
            new_cuts = separate_gmi(
                prob, root_lp, base_lo, base_up, int_mask,
                max_cuts=opts.cuts_per_round, int_tol=opts.int_tol,
            )
            if not new_cuts:
                break
            first_new = prob.n + prob.m
            candidate = extend_with_rows(prob, new_cuts)
            cand_lo = np.concatenate([base_lo, candidate.slack_lower[prob.m:]])
            cand_up = np.concatenate([base_up, candidate.slack_upper[prob.m:]])
            warm = None
            if root_lp.basis is not None:
                warm = Basis(
                    np.concatenate([
                        root_lp.basis.basic,
                        np.arange(first_new, first_new + len(new_cuts),
                                  dtype=np.int64),
                    ]),
                    np.concatenate([
                        root_lp.basis.vstat,
                        np.full(len(new_cuts), BASIC, dtype=np.int8),
                    ]),
                )
            try:
                cand_lp = solve_lp(
                    candidate, cand_lo, cand_up, warm=warm,
                    feas_tol=opts.feas_tol, lu_mode=opts.lu_mode,
                    refactor_every=opts.refactor_every,
                    max_iterations=max(2_000, 2 * (candidate.m + candidate.n)),
                )
            except NumericalBreakdownError:
                break
            lp_iterations += cand_lp.iterations
            if cand_lp.status != OPTIMAL:
                break
            prev_obj = root_lp.objective
            prob, base_lo, base_up, root_lp = candidate, cand_lo, cand_up, cand_lp
            if opts.verbose:
                print(f"  cuts: +{len(new_cuts)} rows, root bound "
                      f"{root_lp.objective:.6f} ({cand_lp.iterations} iterations, "
                      f"{time.perf_counter() - round_started:.1f}s)", flush=True)
            if root_lp.objective - prev_obj <= 1e-7 * max(1.0, abs(prev_obj)):
                stall += 1
                if stall >= 2:
                    break
            else:
                stall = 0
        if prob.m > propagator.m:
            # rebind to the augmented rows so node propagation sees the cuts
            propagator = Propagator(prob)

    def cutoff() -> float:
        if not math.isfinite(inc_obj):
            return math.inf
        return inc_obj - 1e-9 * max(1.0, abs(inc_obj))

    def fractional_of(point: dict[int, float]) -> list[tuple[int, float]]:
        out = []
        for j in binaries:
            x = point[j]
            if min(x, 1.0 - x) > opts.int_tol:
                out.append((j, x))
        return out

    def reduced_cost_fixing() -> None:
        # A nonbasic binary whose root reduced cost already prices a move
        # off its bound past the cutoff can be fixed there for the rest of
        # the search; probed pairs give the same argument with exact LP
        # values.  Strictly improving solutions all survive this.
        rc = root_lp.reduced_costs
        if rc is None or not math.isfinite(inc_obj):
            return
        co = cutoff()
        margin = co - root_lp.objective
        if margin < 0:
            return
        fixed = 0
        for j in binaries:
            if base_lo[j] != base_up[j]:
                x = root_lp.point[j]
                if x <= opts.int_tol and rc[j] > margin:
                    base_lo[j] = base_up[j] = 0.0
                    fixed += 1
                elif x >= 1.0 - opts.int_tol and -rc[j] > margin:
                    base_lo[j] = base_up[j] = 1.0
                    fixed += 1
        for j, (b0, b1) in probe_pairs.items():
            if base_lo[j] != base_up[j] and not (b0 >= co and b1 >= co):
                if b0 >= co:
                    base_lo[j] = base_up[j] = 1.0
                    fixed += 1
                elif b1 >= co:
                    base_lo[j] = base_up[j] = 0.0
                    fixed += 1
        if fixed and opts.verbose:
            print(f"bound arguments fixed {fixed} binaries", flush=True)

    def accept_incumbent(obj: float, point: dict[int, float], basis: Basis | None) -> None:
        nonlocal inc_obj, inc_point, inc_basis
        if obj < inc_obj - 1e-12:
            inc_obj = obj
            inc_point = dict(point)
            inc_basis = basis
            incumbent_history.append((nodes_processed, obj))
            if opts.verbose:
                print(f"incumbent {obj:.6f} at node {nodes_processed}", flush=True)
            reduced_cost_fixing()

    def fixed_pattern_lp(pattern: dict[int, float], warm: Basis | None) -> LpSolution:
        lo2, up2 = base_lo.copy(), base_up.copy()
        for j, v in pattern.items():
            lo2[j] = up2[j] = v
        return lp(lo2, up2, warm)

    def dive_heuristic(start: LpSolution) -> None:
        """Hard-fix one binary per round, most integral first, re-solving
        after each fix.  Binaries sitting at an integral value are pinned
        there too, which keeps the warm re-solves tiny; when those soft
        pins paint the dive into a corner they are dropped for the round
        and only the accumulated hard fixes remain.
        """
        nonlocal lp_iterations
        hard_fix: dict[int, float] = {}
        sol = start
        for _ in range(len(binaries) + 16):
            if sol.objective >= cutoff():
                return
            fracs = fractional_of(sol.point)
            if not fracs:
                accept_incumbent(sol.objective, sol.point, sol.basis)
                return
            j, x = min(fracs, key=lambda it: (min(it[1], 1.0 - it[1]), it[0]))
            first = 1.0 if x >= 0.5 else 0.0
            placed = None
            for with_pins in (True, False):
                lo2, up2 = base_lo.copy(), base_up.copy()
                for k, v in hard_fix.items():
                    lo2[k] = up2[k] = v
                if with_pins:
                    for k in binaries:
                        xk = sol.point[k]
                        if k not in hard_fix and min(xk, 1.0 - xk) <= opts.int_tol:
                            vk = 1.0 if xk >= 0.5 else 0.0
                            lo2[k] = up2[k] = vk
                for side in (first, 1.0 - first):
                    lo2[j] = up2[j] = side
                    plo, pup = lo2.copy(), up2.copy()
                    if not propagator.run(plo, pup, int_mask,
                                          feas_tol=opts.feas_tol,
                                          int_tol=opts.int_tol, max_rounds=8):
                        continue
                    trial = lp(plo, pup, sol.basis)
                    lp_iterations += trial.iterations
                    if trial.status == OPTIMAL:
                        placed = (trial, side)
                        break
                if placed is not None:
                    break
            if placed is None:
                return
            sol, hard_fix[j] = placed

    last_neighborhood = math.inf

    def neighborhood_improve() -> None:
        """Re-decide the binaries where incumbent and relaxation disagree.

        Everything they agree on is pinned and the remaining small problem
        is solved exactly (well, within the same gap) by recursion on the
        original model; the recursion re-derives its own relaxation, so
        none of this problem's appended rows or bound arguments leak in as
        assumptions, they only shape which binaries stay free.
        """
        nonlocal last_neighborhood, lp_iterations
        if inc_point is None:
            return
        last_neighborhood = inc_obj
        budget = 45.0
        if opts.time_limit_seconds is not None:
            remaining = opts.time_limit_seconds - (time.monotonic() - t_start)
            budget = min(budget, 0.4 * remaining)
        if budget < 5.0:
            return
        fixes: dict[int, float] = {}
        for j in binaries:
            if base_lo[j] == base_up[j]:
                fixes[j] = base_lo[j]
                continue
            xr = root_lp.point[j]
            if min(xr, 1.0 - xr) <= opts.int_tol and (
                (xr >= 0.5) == (inc_point[j] >= 0.5)
            ):
                fixes[j] = 1.0 if xr >= 0.5 else 0.0
        free = len(binaries) - len(fixes)
        if free == 0 or free > max(len(binaries) // 3, 160):
            return
        sub = copy.copy(model)
        sub.variables = [
            replace(v, lower=fixes[v.id], upper=fixes[v.id])
            if v.id in fixes else v
            for v in model.variables
        ]
        sub_opts = replace(
            opts, neighborhood_search=False, verbose=0, trace_nodes=False,
            node_limit=2000, time_limit_seconds=budget, cut_rounds=2,
        )
        result = solve_milp(sub, sub_opts)
        lp_iterations += result.lp_iterations
        if (result.point and math.isfinite(result.objective)
                and result.objective < inc_obj - 1e-9 * max(1.0, abs(inc_obj))):
            accept_incumbent(result.objective, result.point, None)

    # rounding heuristic on the root relaxation, then a dive if it failed
    root_fracs = fractional_of(root_lp.point)
    if not root_fracs:
        accept_incumbent(root_lp.objective, root_lp.point, root_lp.basis)
    else:
        pattern = {j: (1.0 if root_lp.point[j] >= 0.5 else 0.0) for j in binaries}
        trial = fixed_pattern_lp(pattern, root_lp.basis)
        lp_iterations += trial.iterations
        if trial.status == OPTIMAL:
            accept_incumbent(trial.objective, trial.point, trial.basis)
        if inc_point is None:
            dive_heuristic(root_lp)
    if opts.neighborhood_search and inc_point is not None:
        neighborhood_improve()

    if root_fracs:
        j, f = _select_branch_var(opts.branch_rule, root_fracs, pseudo)
        kids = _make_children(
            0, 0, root_lp.objective, {}, {}, root_lp.basis, j, f
        )
        plunge: _Node | None = kids[0] if root_lp.point[j] >= 0.5 else kids[1]
        other = kids[1] if plunge is kids[0] else kids[0]
        heapq.heappush(heap, (other.bound_est, other))
    else:
        plunge = None

    seq_counter = 2
    status = None
    final_bound = None
    plunge_len = 0
    last_dive_at = 1

    def live_heap_bound() -> float:
        while heap and heap[0][1].closed:
            heapq.heappop(heap)
        return heap[0][0] if heap else math.inf

    while True:
        global_bound = min(live_heap_bound(),
                           plunge.bound_est if plunge is not None else math.inf)
        if probe_lift > global_bound:
            global_bound = min(probe_lift, inc_obj)
        if inc_point is not None:
            if global_bound >= cutoff():
                # nothing left that could beat the incumbent
                status, final_bound = OPTIMAL, inc_obj
                break
            if inc_obj - global_bound <= opts.gap_tol * max(1.0, abs(inc_obj)):
                status, final_bound = GAP_LIMIT, global_bound
                break
        elif not math.isfinite(global_bound):
            status, final_bound = INFEASIBLE, math.inf
            break
        if nodes_processed >= opts.node_limit:
            status = FEASIBLE if inc_point is not None else NODE_LIMIT
            final_bound = global_bound
            break
        if opts.time_limit_seconds is not None and (
            time.monotonic() - t_start > opts.time_limit_seconds
        ):
            status = FEASIBLE if inc_point is not None else TIME_LIMIT
            final_bound = global_bound
            break

        if plunge is not None and (inc_point is None or plunge_len < 20):
            node = plunge
            plunge = None
            plunge_len += 1
        else:
            if plunge is not None:
                # cap dives once an incumbent exists: returning to the best
                # open node is what actually moves the global bound
                heapq.heappush(heap, (plunge.bound_est, plunge))
                plunge = None
            bound, node = heapq.heappop(heap)
            if node.closed:
                continue
            plunge_len = 0
        if node.bound_est >= cutoff():
            continue

        # intersect the branching window with the current base bounds, so
        # fixes made after this node was queued still apply (a conflict
        # empties the window, which prunes the node as infeasible)
        lo2, up2 = base_lo.copy(), base_up.copy()
        for k, v in node.lo_over.items():
            if v > lo2[k]:
                lo2[k] = v
        for k, v in node.up_over.items():
            if v < up2[k]:
                up2[k] = v
        # propagate the branching decisions before paying for an LP: many
        # doomed branches (shutting a unit its ramp cannot restart, say)
        # die right here, and survivors hand the LP a tighter box
        if not propagator.run(lo2, up2, int_mask, feas_tol=opts.feas_tol,
                              int_tol=opts.int_tol, max_rounds=8):
            nodes_processed += 1
            plunge_len = 0
            continue
        sol = lp(lo2, up2, node.basis)
        nodes_processed += 1
        lp_iterations += sol.iterations

        if node.branch_var >= 0 and sol.status == OPTIMAL:
            degradation = max(sol.objective - node.parent_obj, 0.0)
            frac_moved = (1.0 - node.parent_frac) if node.branch_up else node.parent_frac
            pseudo.record(node.branch_var, node.branch_up, degradation, frac_moved)

        if sol.status != OPTIMAL:
            if opts.trace_nodes:
                trace.append((nodes_processed, node.depth, math.inf,
                              min(live_heap_bound(), inc_obj), inc_obj))
            continue
        if sol.objective >= cutoff():
            if opts.trace_nodes:
                trace.append((nodes_processed, node.depth, sol.objective,
                              min(live_heap_bound(), inc_obj), inc_obj))
            continue

        fracs = fractional_of(sol.point)
        if not fracs:
            accept_incumbent(sol.objective, sol.point, sol.basis)
            if opts.trace_nodes:
                trace.append((nodes_processed, node.depth, sol.objective,
                              min(live_heap_bound(), inc_obj), inc_obj))
            continue

        if nodes_processed - last_dive_at >= 150:
            # an occasional dive from the current relaxation often turns up
            # a better incumbent, and tighter cutoffs shrink everything else
            last_dive_at = nodes_processed
            dive_heuristic(sol)
            if (opts.neighborhood_search
                    and inc_obj < last_neighborhood - 1e-6):
                neighborhood_improve()
        if opts.verbose and nodes_processed % 200 == 0:
            print(f"node {nodes_processed}: bound={global_bound:.6f} "
                  f"incumbent={inc_obj:.6f} open={len(heap)}", flush=True)

        j, f = _select_branch_var(opts.branch_rule, fracs, pseudo)
        kids = _make_children(
            seq_counter, node.depth, sol.objective,
            node.lo_over, node.up_over, sol.basis, j, f,
        )
        seq_counter += 2
        if opts.trace_nodes:
            trace.append((nodes_processed, node.depth, sol.objective,
                          min(live_heap_bound(), sol.objective, inc_obj), inc_obj))
        # keep plunging toward the rounded side; depth-first reuse of the
        # parent basis makes warm starts cheap, and the cutoff prunes any
        # dive that stops paying for itself
        preferred = kids[0] if sol.point[j] >= 0.5 else kids[1]
        other = kids[1] if preferred is kids[0] else kids[0]
        if other.bound_est < cutoff():
            heapq.heappush(heap, (other.bound_est, other))
        plunge = preferred if preferred.bound_est < cutoff() else None

    # polish: fix the incumbent pattern and re-solve so binaries are exact
    objective = math.nan
    point: dict[int, float] = {}
    if inc_point is not None:
        pattern = {j: (1.0 if inc_point[j] >= 0.5 else 0.0) for j in binaries}
        polished = fixed_pattern_lp(pattern, inc_basis)
        lp_iterations += polished.iterations
        if polished.status == OPTIMAL and polished.objective <= inc_obj + 1e-9 * max(1.0, abs(inc_obj)):
            objective = polished.objective
            point = polished.point
        else:
            objective = inc_obj
            point = inc_point
        if status is None:
            status = OPTIMAL
    bound = final_bound if final_bound is not None else math.inf
    if status == OPTIMAL:
        bound = objective
    bound = min(bound, objective) if inc_point is not None else bound
    gap = 0.0
    if inc_point is not None and math.isfinite(objective):
        gap = max(objective - bound, 0.0) / max(1.0, abs(objective))
    return MilpSolution(
        status=status,
        objective=objective,
        best_bound=bound,
        point=point,
        gap=gap if inc_point is not None else math.nan,
        nodes=nodes_processed,
        lp_iterations=lp_iterations,
        incumbent_history=incumbent_history,
        node_trace=trace,
    )


def _make_children(
    seq: int,
    parent_depth: int,
    parent_obj: float,
    lo_over: dict[int, float],
    up_over: dict[int, float],
    basis: Basis | None,
    j: int,
    frac: float,
) -> tuple[_Node, _Node]:
    """Child 0 fixes the branch variable to 1, child 1 fixes it to 0."""
    lo_up = dict(lo_over)
    lo_up[j] = 1.0
    up_dn = dict(up_over)
    up_dn[j] = 0.0
    up_child = _Node(
        seq=seq, depth=parent_depth + 1, bound_est=parent_obj,
        lo_over=lo_up, up_over=dict(up_over), basis=basis,
        branch_var=j, branch_up=True, parent_obj=parent_obj, parent_frac=frac,
    )
    dn_child = _Node(
        seq=seq + 1, depth=parent_depth + 1, bound_est=parent_obj,
        lo_over=dict(lo_over), up_over=up_dn, basis=basis,
        branch_var=j, branch_up=False, parent_obj=parent_obj, parent_frac=frac,
    )
    return up_child, dn_child


def fix_binaries_and_price(
    model: MilpModel,
    point: dict[int, float],
    options: SolveOptions | None = None,
) -> LpSolution:
    """Fix every binary at its rounded value and solve the remaining LP.

    The returned solution carries the duals of all rows, which is how
    nodal prices are obtained from a commitment decision.  Raises
    ``ValueError`` if some binary in ``point`` is not integral within
    ``int_tol``, and returns an infeasible solution object if the fixed
    pattern admits no feasible dispatch (a sign of inconsistent input).
    """
    opts = options or SolveOptions()
    prob = LpProblem(model)
    lo, up = prob.full_bounds()
    for j in model.binary_ids():
        x = point.get(j, 0.0)
        if min(abs(x), abs(1.0 - x)) > opts.int_tol:
            var = model.variables[j]
            raise ValueError(
                f"binary variable {var.name!r} has fractional value {x!r}"
            )
        v = 1.0 if x >= 0.5 else 0.0
        lo[j] = up[j] = v
    return solve_lp(
        prob, lo, up,
        feas_tol=opts.feas_tol, lu_mode=opts.lu_mode,
        refactor_every=opts.refactor_every,
    )
