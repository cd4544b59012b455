"""Shared factories for randomized test models and cases.

Every generator takes an explicit ``random.Random`` so failures
reproduce from the seed printed by the failing assertion.
"""

from __future__ import annotations

import math
import random

import pytest

from hscuc.grid import Branch, Bus, Electrolyzer, FuelCell, Generator, GridCase, WindPlant
from hscuc.milp import MilpModel


def random_milp(rng: random.Random, max_binaries: int = 12) -> MilpModel:
    """A small random MILP whose rows are anchored near an integral point,
    so instances are frequently (not always) feasible."""
    m = MilpModel("random")
    n_bin = rng.randint(2, max_binaries)
    n_cont = rng.randint(0, 5)
    vids = []
    for i in range(n_bin):
        vids.append(m.add_variable(f"b{i}", kind="binary",
                                   objective=rng.uniform(-10, 10)))
    for i in range(n_cont):
        up = rng.choice([rng.uniform(1, 8), math.inf])
        vids.append(m.add_variable(f"x{i}", lower=0.0, upper=up,
                                   objective=rng.uniform(-6, 6)))
    for r in range(rng.randint(2, 8)):
        k = rng.randint(2, min(6, len(vids)))
        chosen = rng.sample(vids, k)
        terms = {}
        for v in chosen:
            coef = rng.choice([float(rng.randint(-5, 5)), round(rng.uniform(-4, 4), 2)])
            terms[v] = coef if coef else 1.0
        point = {v: (float(rng.random() < 0.5) if v < n_bin else rng.uniform(0, 3))
                 for v in chosen}
        act = sum(terms[v] * point[v] for v in chosen)
        sense = rng.choice(["<=", "<=", ">=", "="])
        rhs = act + (rng.uniform(-1.5, 1.5) if sense != "="
                     else rng.choice([0.0, rng.uniform(-1, 1)]))
        m.add_constraint(f"r{r}", terms, sense, round(rhs, 3))
    return m


def random_bounded_lp(rng: random.Random) -> MilpModel:
    """A random LP with finite variable boxes, hence never unbounded."""
    m = MilpModel("lp")
    vids = []
    for i in range(rng.randint(2, 9)):
        lo = rng.uniform(-4, 1)
        vids.append(m.add_variable(f"x{i}", lower=lo, upper=lo + rng.uniform(0.5, 6),
                                   objective=rng.uniform(-5, 5)))
    for r in range(rng.randint(1, 7)):
        k = rng.randint(1, min(5, len(vids)))
        chosen = rng.sample(vids, k)
        terms = {v: round(rng.uniform(-3, 3), 3) or 1.0 for v in chosen}
        point = {v: rng.uniform(-2, 2) for v in chosen}
        act = sum(terms[v] * point[v] for v in chosen)
        m.add_constraint(f"r{r}", terms, rng.choice(["<=", ">=", "="]),
                         round(act + rng.uniform(-1, 2), 3))
    return m


def small_case(
    rng: random.Random | None = None,
    *,
    n_gens: int = 2,
    horizon: int = 3,
    with_wind: bool = True,
    with_hydrogen: bool = False,
) -> GridCase:
    """A 3-bus case; randomized but always structurally valid."""
    rng = rng or random.Random(0)
    buses = (Bus(1, 230.0, True), Bus(2, 230.0), Bus(3, 230.0))
    branches = (
        Branch(1, 1, 2, 0.10, rng.uniform(60, 140)),
        Branch(2, 2, 3, 0.08, rng.uniform(60, 140)),
        Branch(3, 1, 3, 0.12, rng.uniform(60, 140)),
    )
    gens = []
    for i in range(n_gens):
        p_max = rng.uniform(80, 160)
        p_min = rng.uniform(0.1, 0.35) * p_max
        on = rng.random() < 0.7
        gens.append(Generator(
            id=i + 1, bus=1 + (i % 3),
            p_min=round(p_min, 2), p_max=round(p_max, 2),
            ramp_hourly=round(rng.uniform(0.4, 1.0) * p_max, 2),
            ramp_10min=round(rng.uniform(0.1, 0.3) * p_max, 2),
            cost_energy=round(rng.uniform(8, 40), 2),
            cost_no_load=round(rng.uniform(0, 300), 2),
            cost_startup=round(rng.uniform(0, 900), 2),
            co2_rate=round(rng.uniform(300, 900), 1),
            initial_on=int(on),
            initial_output=round(rng.uniform(p_min, p_max), 2) if on else 0.0,
        ))
    peak = sum(g.p_max for g in gens)
    demand = {}
    for n in (1, 2, 3):
        share = rng.uniform(0.1, 0.3)
        demand[n] = tuple(round(share * peak * rng.uniform(0.55, 0.8), 2)
                          for _ in range(horizon))
    wind = ()
    if with_wind:
        wind = (WindPlant(1, 2, tuple(round(rng.uniform(5, 40), 2)
                                      for _ in range(horizon))),)
    elec, fc = (), ()
    if with_hydrogen:
        elec = (Electrolyzer(1, 2, 60.0, 0.8),)
        fc = (FuelCell(1, 3, 50.0, 0.6),)
    return GridCase(
        name="small3", mva_base=100.0, horizon=horizon,
        buses=buses, branches=branches, generators=tuple(gens),
        demand=demand, wind_plants=wind,
        electrolyzers=elec, fuel_cells=fc,
        hydrogen_e_initial=20.0 if with_hydrogen else 0.0,
        hydrogen_e_max=200.0 if with_hydrogen else None,
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(1234)
