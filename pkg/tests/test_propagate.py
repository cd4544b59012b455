"""Activity-based bound propagation: soundness and deduction strength."""

from __future__ import annotations

import itertools
import math
import random

import numpy as np
import pytest

from hscuc.milp import MilpModel
from hscuc.propagate import Propagator
from hscuc.simplex import LpProblem, solve_lp, OPTIMAL


def _setup(model: MilpModel):
    prob = LpProblem(model)
    lo, up = prob.full_bounds()
    int_mask = np.zeros(prob.n, dtype=bool)
    for j in model.binary_ids():
        int_mask[j] = True
    return prob, lo, up, int_mask


def pure_binary_model(rng: random.Random, n_bin: int) -> MilpModel:
    m = MilpModel("pb")
    vids = [m.add_variable(f"b{i}", kind="binary", lower=0.0, upper=1.0,
                           objective=rng.uniform(-3, 3)) for i in range(n_bin)]
    for r in range(rng.randint(1, 6)):
        chosen = rng.sample(vids, rng.randint(1, n_bin))
        terms = {v: round(rng.uniform(-3, 3), 2) or 1.0 for v in chosen}
        point = {v: float(rng.random() < 0.5) for v in chosen}
        act = sum(terms[v] * point[v] for v in chosen)
        sense = rng.choice(["<=", ">=", "="])
        rhs = act if sense == "=" else round(act + rng.uniform(-1, 1), 2)
        m.add_constraint(f"r{r}", terms, sense, rhs)
    return m


def feasible_patterns(model: MilpModel) -> list[tuple[float, ...]]:
    bins = model.binary_ids()
    out = []
    for bits in itertools.product((0.0, 1.0), repeat=len(bins)):
        point = dict(zip(bins, bits))
        ok = True
        for con in model.constraints:
            lhs = sum(c * point[v] for v, c in con.terms)
            if con.sense == "<=" and lhs > con.rhs + 1e-9:
                ok = False
            elif con.sense == ">=" and lhs < con.rhs - 1e-9:
                ok = False
            elif con.sense == "=" and abs(lhs - con.rhs) > 1e-9:
                ok = False
            if not ok:
                break
        if ok:
            out.append(bits)
    return out


def test_one_ulp_division_overshoot_is_scrubbed():
    # 0.16*b4 - b7 = -0.84 with b7 fixed to 1 deduces b4 = 0.16/0.16, which
    # in floats lands one ulp above 1.0; the box must come back exact
    m = MilpModel()
    b4 = m.add_variable("b4", kind="binary", lower=0.0, upper=1.0)
    b7 = m.add_variable("b7", kind="binary", lower=0.0, upper=1.0)
    m.add_constraint("eq", {b4: 0.16, b7: -1.0}, "=", -0.84)
    prob, lo, up, int_mask = _setup(m)
    lo[b7] = up[b7] = 1.0
    assert Propagator(prob).run(lo, up, int_mask)
    assert lo[b4] == 1.0 and up[b4] == 1.0
    assert solve_lp(prob, lo, up).status == OPTIMAL


def test_integral_snap_strengthens_fractional_deductions():
    # 2 b <= 1.5 allows b <= 0.75, and an integral b therefore equals 0
    m = MilpModel()
    b = m.add_variable("b", kind="binary", lower=0.0, upper=1.0)
    m.add_constraint("r", {b: 2.0}, "<=", 1.5)
    prob, lo, up, int_mask = _setup(m)
    assert Propagator(prob).run(lo, up, int_mask)
    assert up[b] == 0.0

    # the same row over a continuous variable keeps the fractional bound
    m2 = MilpModel()
    x = m2.add_variable("x", lower=0.0, upper=1.0)
    m2.add_constraint("r", {x: 2.0}, "<=", 1.5)
    prob2, lo2, up2, mask2 = _setup(m2)
    assert Propagator(prob2).run(lo2, up2, mask2)
    assert up2[x] == pytest.approx(0.75, abs=1e-9)


def test_integer_window_without_integers_is_infeasible():
    # 0.4 <= b <= 0.6 admits no integer
    m = MilpModel()
    b = m.add_variable("b", kind="binary", lower=0.0, upper=1.0)
    m.add_constraint("lo", {b: 1.0}, ">=", 0.4)
    m.add_constraint("hi", {b: 1.0}, "<=", 0.6)
    prob, lo, up, int_mask = _setup(m)
    assert Propagator(prob).run(lo, up, int_mask) is False


def test_infinite_contributions_do_not_absorb():
    # y unbounded below keeps the row minimum open, so x deduces nothing
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=9.0)
    y = m.add_variable("y", lower=-math.inf, upper=0.0)
    m.add_constraint("r", {x: 1.0, y: 1.0}, "<=", 5.0)
    prob, lo, up, int_mask = _setup(m)
    assert Propagator(prob).run(lo, up, int_mask)
    assert up[x] == 9.0 and lo[x] == 0.0
    # y itself is the single open entry: the closed side does give it a bound
    assert math.isinf(lo[y])


def test_single_open_entry_still_deduces():
    # row minimum is open only through y, so y's own residual is usable
    m = MilpModel()
    x = m.add_variable("x", lower=1.0, upper=2.0)
    y = m.add_variable("y", lower=-math.inf)  # free
    m.add_constraint("r", {x: 1.0, y: 1.0}, "<=", 5.0)
    prob, lo, up, int_mask = _setup(m)
    assert Propagator(prob).run(lo, up, int_mask)
    assert up[y] == pytest.approx(4.0)  # 5 - min(x)
    assert math.isinf(lo[y])


def test_equality_fixes_cascade():
    m = MilpModel()
    a = m.add_variable("a", kind="binary", lower=0.0, upper=1.0)
    b = m.add_variable("b", kind="binary", lower=0.0, upper=1.0)
    c = m.add_variable("c", lower=0.0, upper=10.0)
    m.add_constraint("e1", {a: 1.0, b: 1.0}, "=", 2.0)  # forces a = b = 1
    m.add_constraint("e2", {a: 3.0, c: -1.0}, "=", 0.0)  # then c = 3
    prob, lo, up, int_mask = _setup(m)
    assert Propagator(prob).run(lo, up, int_mask)
    assert lo[a] == up[a] == 1.0
    assert lo[b] == up[b] == 1.0
    assert lo[c] == up[c] == pytest.approx(3.0)


def test_propagation_never_cuts_feasible_patterns(rng):
    # soundness: every feasible 0/1 assignment survives inside the box,
    # and a False return certifies there are none at all
    pruned_something = 0
    for trial in range(200):
        n_bin = rng.randint(2, 8)
        model = pure_binary_model(rng, n_bin)
        prob, lo, up, int_mask = _setup(model)
        feasible = feasible_patterns(model)
        ok = Propagator(prob).run(lo, up, int_mask)
        if not ok:
            assert feasible == [], f"trial {trial}: pruned a feasible model"
            continue
        bins = model.binary_ids()
        for bits in feasible:
            for j, v in zip(bins, bits):
                assert lo[j] - 1e-9 <= v <= up[j] + 1e-9, (
                    f"trial {trial}: pattern {bits} cut at var {j}"
                )
        if any(lo[j] > 0.0 or up[j] < 1.0 for j in bins):
            pruned_something += 1
    assert pruned_something >= 20  # the pass does do work


def test_run_mutates_in_place_and_terminates():
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=100.0)
    y = m.add_variable("y", lower=0.0, upper=100.0)
    # a slowly contracting pair of rows exercises the round cap
    m.add_constraint("r1", {x: 1.0, y: -0.99}, "<=", 0.0)
    m.add_constraint("r2", {y: 1.0, x: -0.99}, "<=", 0.0)
    prob, lo, up, int_mask = _setup(m)
    before = up.copy()
    assert Propagator(prob).run(lo, up, int_mask, max_rounds=3)
    assert up[x] < before[x]  # progress happened in the caller's array


def test_fixed_binary_consistency_check():
    # fixing both sides of an equality inconsistently must report emptiness
    m = MilpModel()
    a = m.add_variable("a", kind="binary", lower=0.0, upper=1.0)
    b = m.add_variable("b", kind="binary", lower=0.0, upper=1.0)
    m.add_constraint("eq", {a: 1.0, b: 1.0}, "=", 1.0)
    prob, lo, up, int_mask = _setup(m)
    lo[a] = up[a] = 1.0
    lo[b] = up[b] = 1.0
    assert Propagator(prob).run(lo, up, int_mask) is False
