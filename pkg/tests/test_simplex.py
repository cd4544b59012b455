"""Bounded-variable simplex: correctness against scipy, duality, edge cases."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest
import scipy.optimize

from hscuc.milp import MilpModel
from hscuc.simplex import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    NumericalBreakdownError,
    _Simplex,
    solve_lp,
    solve_model_lp,
)

from conftest import random_bounded_lp


def scipy_reference(prob: LpProblem):
    """Solve the same LP with scipy.optimize.linprog (HiGHS)."""
    lo_r = prob.b - prob.slack_upper  # A x >= lo_r where finite
    up_r = prob.b - prob.slack_lower  # A x <= up_r where finite
    A = prob.A.toarray()
    rows_ub, rhs_ub = [], []
    for i in range(prob.m):
        if np.isfinite(up_r[i]):
            rows_ub.append(A[i])
            rhs_ub.append(up_r[i])
        if np.isfinite(lo_r[i]):
            rows_ub.append(-A[i])
            rhs_ub.append(-lo_r[i])
    bounds = [(prob.lower[j] if np.isfinite(prob.lower[j]) else None,
               prob.upper[j] if np.isfinite(prob.upper[j]) else None)
              for j in range(prob.n)]
    return scipy.optimize.linprog(
        prob.c, A_ub=np.array(rows_ub) if rows_ub else None,
        b_ub=np.array(rhs_ub) if rhs_ub else None,
        bounds=bounds, method="highs",
    )


def test_randomized_lps_match_scipy(rng):
    solved = 0
    for trial in range(120):
        model = random_bounded_lp(rng)
        prob = LpProblem(model)
        ours = solve_lp(prob)
        ref = scipy_reference(prob)
        if ref.status == 0:
            assert ours.status == OPTIMAL, f"trial {trial}: scipy optimal, ours {ours.status}"
            scale = max(1.0, abs(ref.fun))
            assert abs(ours.objective - (ref.fun + prob.c0)) <= 1e-6 * scale, (
                f"trial {trial}: {ours.objective} vs {ref.fun + prob.c0}"
            )
            solved += 1
        elif ref.status == 2:
            assert ours.status == INFEASIBLE, f"trial {trial}: scipy infeasible, ours {ours.status}"
    assert solved >= 30  # the generator skews feasible


def test_duality_gap_on_optimal_solves(rng):
    for trial in range(60):
        model = random_bounded_lp(rng)
        sol = solve_model_lp(model)
        if sol.status == OPTIMAL:
            scale = max(1.0, abs(sol.objective))
            assert abs(sol.objective - sol.dual_objective) <= 1e-6 * scale, (
                f"trial {trial}: gap {sol.objective - sol.dual_objective}"
            )
            assert sol.duality_gap <= 1e-6 * scale
            assert sol.primal_residual <= 1e-6


def test_degenerate_duplicated_structure_matches_scipy(rng):
    # duplicated rows and columns induce heavy ties in ratio tests; the
    # answer must not change
    for trial in range(25):
        model = MilpModel("degen")
        n = rng.randint(2, 4)
        vids = [model.add_variable(f"x{i}", lower=0.0, upper=4.0,
                                   objective=rng.choice([1.0, 1.0, -2.0]))
                for i in range(n)]
        # clone every variable: identical column, identical cost
        clones = [model.add_variable(f"c{i}", lower=0.0, upper=4.0,
                                     objective=model.objective.get(vids[i], 0.0))
                  for i in range(n)]
        for r in range(rng.randint(2, 4)):
            terms = {}
            for i in rng.sample(range(n), rng.randint(1, n)):
                coef = float(rng.randint(1, 3))
                terms[vids[i]] = coef
                terms[clones[i]] = coef
            rhs = float(rng.randint(2, 8))
            model.add_constraint(f"r{r}", terms, "<=", rhs)
            model.add_constraint(f"r{r}dup", terms, "<=", rhs)
        prob = LpProblem(model)
        ours = solve_lp(prob)
        ref = scipy_reference(prob)
        assert (ours.status == OPTIMAL) == (ref.status == 0)
        if ref.status == 0:
            assert abs(ours.objective - ref.fun) <= 1e-6 * max(1.0, abs(ref.fun))


def test_handcrafted_equality_and_ranges():
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=10.0, objective=2.0)
    y = m.add_variable("y", lower=0.0, upper=10.0, objective=3.0)
    m.add_constraint("sum", {x: 1.0, y: 1.0}, "=", 6.0)
    m.add_constraint("cap", {x: 1.0}, "<=", 4.0)
    sol = solve_model_lp(m)
    assert sol.status == OPTIMAL
    # cheapest way to reach 6 is x at its row cap
    assert sol.point[x] == pytest.approx(4.0, abs=1e-7)
    assert sol.point[y] == pytest.approx(2.0, abs=1e-7)
    assert sol.objective == pytest.approx(14.0, abs=1e-6)


def test_infeasible_rows_detected():
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=10.0)
    m.add_constraint("hi", {x: 1.0}, ">=", 7.0)
    m.add_constraint("lo", {x: 1.0}, "<=", 3.0)
    assert solve_model_lp(m).status == INFEASIBLE


def test_unbounded_detected_with_and_without_rows():
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, objective=-1.0)  # upper defaults open
    y = m.add_variable("y", lower=0.0, objective=0.0)
    m.add_constraint("link", {x: 1.0, y: -1.0}, "<=", 0.0)
    assert solve_model_lp(m).status == UNBOUNDED

    boxless = MilpModel()
    boxless.add_variable("z", lower=0.0, objective=-1.0)
    assert solve_model_lp(boxless).status == UNBOUNDED  # m == 0 path


def test_bounded_boxed_problem_without_rows():
    m = MilpModel()
    a = m.add_variable("a", lower=-2.0, upper=5.0, objective=1.5)
    b = m.add_variable("b", lower=-1.0, upper=3.0, objective=-2.0)
    f = m.add_variable("f", lower=-math.inf, objective=0.0)  # free, zero cost
    sol = solve_model_lp(m)
    assert sol.status == OPTIMAL
    assert sol.point[a] == -2.0 and sol.point[b] == 3.0 and sol.point[f] == 0.0
    assert sol.objective == pytest.approx(-9.0)


def test_fixed_variables_and_objective_constant():
    m = MilpModel()
    x = m.add_variable("x", lower=2.5, upper=2.5, objective=4.0)
    y = m.add_variable("y", lower=0.0, upper=9.0, objective=1.0)
    m.add_constraint("r", {x: 1.0, y: 1.0}, ">=", 5.0)
    m.objective_constant = 100.0
    sol = solve_model_lp(m)
    assert sol.status == OPTIMAL
    assert sol.point[x] == 2.5
    assert sol.point[y] == pytest.approx(2.5, abs=1e-7)
    assert sol.objective == pytest.approx(112.5, abs=1e-6)


def test_warm_restart_from_optimal_basis_is_free(rng):
    for _ in range(10):
        model = random_bounded_lp(rng)
        prob = LpProblem(model)
        cold = solve_lp(prob)
        if cold.status != OPTIMAL:
            continue
        warm = solve_lp(prob, warm=cold.basis)
        assert warm.status == OPTIMAL
        assert warm.iterations <= 2
        assert warm.objective == pytest.approx(cold.objective, abs=1e-8)


def test_warm_restart_after_bound_change(rng):
    for _ in range(20):
        model = random_bounded_lp(rng)
        prob = LpProblem(model)
        cold = solve_lp(prob)
        if cold.status != OPTIMAL:
            continue
        lo, up = prob.full_bounds()
        j = rng.randrange(prob.n)
        lo[j] = up[j] = 0.5 * (lo[j] + up[j])
        again_cold = solve_lp(prob, lo, up)
        again_warm = solve_lp(prob, lo, up, warm=cold.basis)
        assert again_warm.status == again_cold.status
        if again_cold.status == OPTIMAL:
            assert again_warm.objective == pytest.approx(again_cold.objective,
                                                         abs=1e-6)


def test_sub_tolerance_crossed_bounds_collapse_to_a_point():
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=1.0, objective=1.0)
    y = m.add_variable("y", lower=0.0, upper=4.0, objective=1.0)
    m.add_constraint("r", {x: 1.0, y: 1.0}, ">=", 1.0)
    prob = LpProblem(m)
    lo, up = prob.full_bounds()
    lo[x] = 0.75 + 5e-8  # a hair above the upper bound
    up[x] = 0.75
    sol = solve_lp(prob, lo, up)
    assert sol.status == OPTIMAL
    assert sol.point[x] == pytest.approx(0.75, abs=1e-6)
    # the caller's arrays are not rewritten
    assert lo[x] == 0.75 + 5e-8

    lo[x] = 0.80  # a genuine crossing is a genuine infeasibility
    assert solve_lp(prob, lo, up).status == INFEASIBLE


def test_iteration_limit_raises_with_history():
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=10.0, objective=1.0)
    m.add_constraint("eq", {x: 1.0}, "=", 5.0)
    with pytest.raises(NumericalBreakdownError):
        solve_model_lp(m, max_iterations=0)


def test_reduced_cost_signs_at_optimum(rng):
    for _ in range(20):
        model = random_bounded_lp(rng)
        prob = LpProblem(model)
        sol = solve_lp(prob)
        if sol.status != OPTIMAL:
            continue
        lo, up = prob.full_bounds()
        for j, d in sol.reduced_costs.items():
            x = sol.point[j]
            at_lo = abs(x - lo[j]) <= 1e-6
            at_up = abs(x - up[j]) <= 1e-6
            if at_lo and not at_up:
                assert d >= -1e-6, f"var {j} at lower with d={d}"
            elif at_up and not at_lo:
                assert d <= 1e-6, f"var {j} at upper with d={d}"
            elif not at_lo and not at_up:
                assert abs(d) <= 1e-6, f"interior var {j} with d={d}"


def test_bound_perturbation_round_trip():
    # white box: nudged bounds are copies, removal restores the exact arrays
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=2.0, objective=1.0)
    y = m.add_variable("y", lower=-1.0, upper=3.0, objective=-1.0)
    m.add_constraint("r", {x: 1.0, y: 1.0}, "<=", 4.0)
    prob = LpProblem(m)
    lo, up = prob.full_bounds()
    eng = _Simplex(prob, lo, up, feas_tol=1e-6, lu_mode="auto",
                   refactor_every=64, max_iterations=1000, warm=None)
    eng.in_phase2 = True
    eng._apply_perturbation()
    assert eng.perturb_active
    assert eng.lo is not lo and eng.up is not up
    assert lo[0] == 0.0 and up[0] == 2.0  # originals untouched
    assert eng.lo[0] < 0.0 and eng.up[0] > 2.0
    nb = [j for j in range(eng.N) if eng.vstat[j] != 2]
    for j in nb:
        assert eng.xval[j] in (eng.lo[j], eng.up[j], 0.0)
    eng._remove_perturbation()
    assert not eng.perturb_active
    assert eng.lo is lo and eng.up is up


def test_full_bounds_overrides():
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=5.0)
    m.add_constraint("r", {x: 1.0}, "<=", 4.0)
    prob = LpProblem(m)
    lo, up = prob.full_bounds({x: 1.0}, {x: 2.0})
    assert lo[x] == 1.0 and up[x] == 2.0
    lo2, up2 = prob.full_bounds()
    assert lo2[x] == 0.0 and up2[x] == 5.0
