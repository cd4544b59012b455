"""Data model validation and wind scaling."""

import dataclasses
import random

import pytest

from hscuc.grid import (
    Branch,
    Bus,
    CaseValidationError,
    Generator,
    Variant,
    WindPlant,
    scale_wind_to_penetration,
    validate_case,
    wind_penetration,
)
from tests.conftest import small_case


def test_variant_names_and_labels():
    assert Variant.check("h-scuc") == "h-scuc"
    assert Variant.label("eh-scuc") == "EH-SCUC"
    with pytest.raises(ValueError, match="unknown variant"):
        Variant.check("x-scuc")


def test_valid_case_passes():
    case = small_case(random.Random(5), with_hydrogen=True)
    report = validate_case(case)
    assert report.ok, [str(p) for p in report.problems]


def _problems(case):
    return {p.path for p in validate_case(case).problems}


def test_validation_catches_defects():
    base = small_case(random.Random(5))

    # no slack bus
    buses = tuple(dataclasses.replace(b, is_slack=False) for b in base.buses)
    assert "buses" in _problems(dataclasses.replace(base, buses=buses))

    # branch to unknown bus and self-loop
    bad_branch = dataclasses.replace(base, branches=(
        Branch(1, 1, 99, 0.1, 100.0), Branch(2, 2, 2, 0.1, 100.0)))
    paths = _problems(bad_branch)
    assert "branches[0].to_bus" in paths and "branches[1]" in paths

    # nonpositive reactance / capacity
    paths = _problems(dataclasses.replace(base, branches=(
        Branch(1, 1, 2, 0.0, 100.0), Branch(2, 2, 3, 0.1, -5.0),
        Branch(3, 1, 3, 0.1, 100.0))))
    assert "branches[0].reactance_pu" in paths and "branches[1].capacity_mw" in paths

    # generator initial state inconsistencies
    g = base.generators[0]
    off_with_output = dataclasses.replace(g, initial_on=0, initial_output=10.0)
    paths = _problems(dataclasses.replace(base, generators=(off_with_output,)))
    assert "generators[0].initial_output" in paths

    on_below_min = dataclasses.replace(g, initial_on=1, initial_output=0.0)
    paths = _problems(dataclasses.replace(base, generators=(on_below_min,)))
    assert "generators[0].initial_output" in paths

    # demand profile length mismatch
    bad_demand = dict(base.demand)
    bad_demand[1] = bad_demand[1][:-1]
    assert "demand[1]" in _problems(dataclasses.replace(base, demand=bad_demand))

    # wind profile length mismatch
    paths = _problems(dataclasses.replace(
        base, wind_plants=(WindPlant(1, 2, (1.0,)),)))
    assert "wind_plants[0].profile" in paths

    # disconnected network
    island = dataclasses.replace(base, branches=(Branch(1, 1, 2, 0.1, 100.0),))
    assert "branches" in _problems(island)

    # storage cap below initial level
    assert "hydrogen_e_max" in _problems(dataclasses.replace(
        base, hydrogen_e_initial=50.0, hydrogen_e_max=10.0))


def test_raise_if_failed_summarizes():
    case = dataclasses.replace(small_case(random.Random(5)), buses=())
    with pytest.raises(CaseValidationError, match="invalid case"):
        validate_case(case).raise_if_failed()


def test_wind_penetration_and_scaling():
    rng = random.Random(11)
    case = small_case(rng)
    for target in (0.10, 0.35, 0.50):
        scaled = scale_wind_to_penetration(case, target)
        assert wind_penetration(scaled) == pytest.approx(target, rel=1e-12)
        # shape preserved: all periods scaled by one common factor
        w0, w1 = case.wind_plants[0].profile, scaled.wind_plants[0].profile
        ratios = {round(a / b, 9) for a, b in zip(w1, w0)}
        assert len(ratios) == 1
    # demand untouched
    assert scale_wind_to_penetration(case, 0.2).demand == case.demand


def test_wind_scaling_edge_cases():
    case = small_case(random.Random(3), with_wind=False)
    assert scale_wind_to_penetration(case, 0.0) is case
    with pytest.raises(ValueError, match="no wind"):
        scale_wind_to_penetration(case, 0.2)
    with pytest.raises(ValueError, match="nonnegative"):
        scale_wind_to_penetration(small_case(random.Random(3)), -0.1)
    no_demand = dataclasses.replace(case, demand={})
    with pytest.raises(ValueError, match="demand"):
        wind_penetration(no_demand)


def test_hub_buses_sorted_union():
    case = small_case(random.Random(5), with_hydrogen=True)
    assert case.hub_buses() == (2, 3)
    assert small_case(random.Random(5)).hub_buses() == ()


def test_demand_helpers():
    case = small_case(random.Random(9), horizon=4)
    t = 2
    assert case.total_demand(t) == pytest.approx(
        sum(prof[t] for prof in case.demand.values()))
    assert case.demand_at(999, 0) == 0.0
    assert case.total_demand_energy() == pytest.approx(
        sum(sum(p) for p in case.demand.values()))
