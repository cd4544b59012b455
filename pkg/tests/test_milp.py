"""Model container semantics, evaluation, and MPS round-trips."""

import math
import random

import pytest

from hscuc.milp import (
    MilpModel,
    MpsFormatError,
    evaluate,
    export_mps,
    parse_mps,
)
from tests.conftest import random_milp


def test_variable_and_constraint_construction():
    m = MilpModel("t")
    x = m.add_variable("x", lower=0.0, upper=5.0, objective=2.0)
    y = m.add_variable("y", kind="binary", objective=-1.0)
    assert (x, y) == (0, 1)
    assert m.binary_ids() == [y]
    cid = m.add_constraint("row", {x: 1.0, y: 3.0}, "<=", 4.0)
    assert m.constraints[cid].terms == ((x, 1.0), (y, 3.0))
    assert m.variable_by_name("y").kind == "binary"
    assert m.constraint_by_name("row").rhs == 4.0


def test_construction_rejects_bad_input():
    m = MilpModel()
    m.add_variable("x")
    with pytest.raises(ValueError):
        m.add_variable("x")  # duplicate name
    with pytest.raises(ValueError):
        m.add_variable("bad_kind", kind="integer")
    with pytest.raises(ValueError):
        m.add_variable("crossed", lower=2.0, upper=1.0)
    with pytest.raises(ValueError):
        m.add_variable("b", kind="binary", upper=2.0)
    with pytest.raises(ValueError):
        m.add_variable("nanlow", lower=math.nan)
    with pytest.raises(ValueError):
        m.add_constraint("r", {0: 1.0}, "=<", 0.0)
    with pytest.raises(ValueError):
        m.add_constraint("r", {5: 1.0}, "<=", 0.0)  # unknown vid
    with pytest.raises(ValueError):
        m.add_constraint("r", {0: math.inf}, "<=", 0.0)
    m.add_constraint("r", {0: 1.0}, "<=", 0.0)
    with pytest.raises(ValueError):
        m.add_constraint("r", {0: 1.0}, "<=", 0.0)  # duplicate row name


def test_terms_merge_and_drop_zeros():
    m = MilpModel()
    x = m.add_variable("x")
    y = m.add_variable("y")
    cid = m.add_constraint("r", [(x, 1.0), (x, 2.0), (y, 1.5), (y, -1.5)], "<=", 1.0)
    assert m.constraints[cid].terms == ((x, 3.0),)


def test_objective_helpers():
    m = MilpModel()
    x = m.add_variable("x", objective=1.0)
    m.add_objective_coef(x, 2.0)
    assert m.objective[x] == 3.0
    m.set_objective_coef(x, 0.0)
    assert x not in m.objective
    m.objective_constant = 7.0
    assert m.objective_value({x: 10.0}) == 7.0


def test_evaluate_reports_each_breach_kind():
    m = MilpModel()
    x = m.add_variable("x", lower=0.0, upper=1.0, objective=1.0)
    y = m.add_variable("y", kind="binary")
    m.add_constraint("le", {x: 1.0}, "<=", 0.5)
    m.add_constraint("ge", {x: 1.0, y: 1.0}, ">=", 1.0)
    m.add_constraint("eq", {y: 2.0}, "=", 0.0)

    ok = evaluate(m, {x: 0.5, y: 0.5})  # eq broken: 1.0 != 0.0
    assert not ok.feasible
    assert [v.name for v in ok.violations] == ["eq"]
    assert ok.max_violation() == pytest.approx(1.0)

    res = evaluate(m, {x: 1.2, y: -0.5})
    names = {v.name for v in res.violations}
    assert {"bound_upper:x", "bound_lower:y", "le", "ge"} <= names

    clean = evaluate(m, {x: 0.5, y: 0.0}, tol=1e-6)
    assert clean.feasible is False  # ge row: 0.5 < 1.0
    clean2 = evaluate(m, {x: 0.0, y: 0.0})
    assert {v.name for v in clean2.violations} == {"ge"}


def test_same_structure_detects_differences():
    a = random_milp(random.Random(7))
    b = random_milp(random.Random(7))
    assert a.same_structure(b)
    b.objective_constant += 1.0
    assert not a.same_structure(b)


def test_mps_round_trip_handcrafted():
    m = MilpModel("edge-case")
    m.add_variable("free", lower=-math.inf, upper=math.inf, objective=1.0)
    m.add_variable("fixed", lower=2.5, upper=2.5)
    m.add_variable("neglow", lower=-3.0, upper=4.0, objective=-0.25)
    m.add_variable("b0", kind="binary", objective=100.0)
    m.add_variable("lonely")  # appears in no row and no objective
    m.add_variable("milow", lower=-math.inf, upper=8.0)
    m.objective_constant = -12.75
    m.add_constraint("le", {0: 1.0, 2: -2.0}, "<=", 4.0)
    m.add_constraint("ge", {1: 1.5, 3: 1.0}, ">=", -1.0)
    m.add_constraint("eq", {0: 1.0, 3: -1.0, 5: 0.125}, "=", 0.0)

    back = parse_mps(export_mps(m))
    assert back.same_structure(m)
    assert back.name == m.name


def test_mps_round_trip_randomized():
    for seed in range(40):
        m = random_milp(random.Random(300 + seed))
        back = parse_mps(export_mps(m))
        assert back.same_structure(m), f"seed {seed}"


def test_mps_numbers_round_trip_exactly():
    m = MilpModel()
    x = m.add_variable("x", lower=1.0 / 3.0, upper=math.pi, objective=0.1)
    m.add_constraint("r", {x: 2.0 / 7.0}, "<=", 1e-17)
    back = parse_mps(export_mps(m))
    v = back.variables[0]
    assert v.lower == 1.0 / 3.0 and v.upper == math.pi
    assert back.objective[0] == 0.1
    assert back.constraints[0].terms[0][1] == 2.0 / 7.0
    assert back.constraints[0].rhs == 1e-17


def test_mps_errors_carry_line_numbers():
    with pytest.raises(MpsFormatError) as exc:
        parse_mps("NAME t\nROWS\n Q  bad\nENDATA\n")
    assert exc.value.line_no == 3

    with pytest.raises(MpsFormatError):
        parse_mps("")  # empty

    with pytest.raises(MpsFormatError, match="ENDATA"):
        parse_mps("NAME t\nROWS\n N  COST\n")

    with pytest.raises(MpsFormatError, match="RANGES"):
        parse_mps("NAME t\nROWS\n N  COST\nRANGES\nENDATA\n")

    with pytest.raises(MpsFormatError, match="unknown row"):
        parse_mps(
            "NAME t\nROWS\n N  COST\n L  r1\nCOLUMNS\n"
            "    x  nosuch  1.0\nENDATA\n"
        )

    with pytest.raises(MpsFormatError, match="number"):
        parse_mps(
            "NAME t\nROWS\n N  COST\n L  r1\nCOLUMNS\n"
            "    x  r1  abc\nENDATA\n"
        )


def test_mps_reserved_objective_row_name():
    m = MilpModel()
    x = m.add_variable("x")
    m.add_constraint("COST", {x: 1.0}, "<=", 1.0)
    with pytest.raises(ValueError, match="reserved"):
        export_mps(m)
