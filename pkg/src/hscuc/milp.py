"""Mixed-integer linear program container and MPS text round-trip.

The model is a plain data structure: variables with bounds, linear rows
with a sense and right-hand side, and a linear objective (always
minimized).  Solvers and builders live elsewhere; everything here is
solver-agnostic so a model can be checked, serialized, and re-read
without touching any solution machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

CONTINUOUS = "continuous"
BINARY = "binary"

SENSES = ("<=", ">=", "=")

MAX_NAME_LEN = 255


class MpsFormatError(ValueError):
    """Raised when MPS text cannot be parsed.  Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Variable:
    """A decision variable.  Bounds may be +-inf; binaries must stay within [0, 1]."""

    id: int
    name: str
    kind: str
    lower: float
    upper: float


@dataclass(frozen=True)
class LinearConstraint:
    """A linear row  sum(coef * var) <sense> rhs.

    ``terms`` holds (variable id, coefficient) pairs sorted by variable id
    with no duplicates and no exact-zero coefficients.
    """

    id: int
    name: str
    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float


@dataclass
class Violation:
    """One breached row or variable bound; ``amount`` is the positive breach size."""

    name: str
    kind: str  # "row" or "bound"
    amount: float


@dataclass
class EvalResult:
    objective: float
    violations: list[Violation]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def max_violation(self) -> float:
        return max((v.amount for v in self.violations), default=0.0)


class MilpModel:
    """Incrementally constructed MILP.

    Variables and constraints get sequential ids starting at 0; creation
    order is the canonical order used by the serializers and the solver,
    so two builds of the same model are byte-identical on export.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[LinearConstraint] = []
        self.objective: dict[int, float] = {}
        self.objective_constant = 0.0
        self._var_names: dict[str, int] = {}
        self._row_names: dict[str, int] = {}

    # -- construction -------------------------------------------------

    def add_variable(
        self,
        name: str,
        kind: str = CONTINUOUS,
        lower: float = 0.0,
        upper: float = math.inf,
        objective: float = 0.0,
    ) -> int:
        if kind not in (CONTINUOUS, BINARY):
            raise ValueError(f"unknown variable kind {kind!r}")
        if name in self._var_names:
            raise ValueError(f"duplicate variable name {name!r}")
        if math.isnan(lower) or math.isnan(upper):
            raise ValueError(f"variable {name!r}: NaN bound")
        if lower > upper:
            raise ValueError(f"variable {name!r}: lower {lower} exceeds upper {upper}")
        if kind == BINARY and math.isinf(upper):
            upper = 1.0  # the continuous default cap means "no explicit cap"
        if kind == BINARY and (lower < 0.0 or upper > 1.0):
            raise ValueError(f"binary variable {name!r} must have bounds within [0, 1]")
        vid = len(self.variables)
        self.variables.append(Variable(vid, name, kind, float(lower), float(upper)))
        self._var_names[name] = vid
        if objective:
            self.objective[vid] = float(objective)
        return vid

    def add_constraint(
        self,
        name: str,
        terms: dict[int, float] | list[tuple[int, float]],
        sense: str,
        rhs: float,
    ) -> int:
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        if name in self._row_names:
            raise ValueError(f"duplicate constraint name {name!r}")
        if math.isnan(rhs):
            raise ValueError(f"constraint {name!r}: NaN right-hand side")
        items = terms.items() if isinstance(terms, dict) else terms
        merged: dict[int, float] = {}
        for vid, coef in items:
            if not 0 <= vid < len(self.variables):
                raise ValueError(f"constraint {name!r}: unknown variable id {vid}")
            if math.isnan(coef) or math.isinf(coef):
                raise ValueError(f"constraint {name!r}: non-finite coefficient")
            merged[vid] = merged.get(vid, 0.0) + float(coef)
        clean = tuple(sorted((vid, c) for vid, c in merged.items() if c != 0.0))
        cid = len(self.constraints)
        self.constraints.append(LinearConstraint(cid, name, clean, sense, float(rhs)))
        self._row_names[name] = cid
        return cid

    def set_objective_coef(self, vid: int, coef: float) -> None:
        if not 0 <= vid < len(self.variables):
            raise ValueError(f"unknown variable id {vid}")
        if coef == 0.0:
            self.objective.pop(vid, None)
        else:
            self.objective[vid] = float(coef)

    def add_objective_coef(self, vid: int, coef: float) -> None:
        self.set_objective_coef(vid, self.objective.get(vid, 0.0) + coef)

    # -- queries ------------------------------------------------------

    def num_variables(self) -> int:
        return len(self.variables)

    def num_constraints(self) -> int:
        return len(self.constraints)

    def binary_ids(self) -> list[int]:
        return [v.id for v in self.variables if v.kind == BINARY]

    def variable_by_name(self, name: str) -> Variable:
        return self.variables[self._var_names[name]]

    def constraint_by_name(self, name: str) -> LinearConstraint:
        return self.constraints[self._row_names[name]]

    def objective_value(self, point: dict[int, float]) -> float:
        return self.objective_constant + sum(
            coef * point.get(vid, 0.0) for vid, coef in self.objective.items()
        )

    def same_structure(self, other: "MilpModel") -> bool:
        """Structural equality: identical variables, rows, and objective."""
        if self.num_variables() != other.num_variables():
            return False
        if self.num_constraints() != other.num_constraints():
            return False
        for a, b in zip(self.variables, other.variables):
            if (a.name, a.kind, a.lower, a.upper) != (b.name, b.kind, b.lower, b.upper):
                return False
        for ca, cb in zip(self.constraints, other.constraints):
            if (ca.name, ca.terms, ca.sense, ca.rhs) != (cb.name, cb.terms, cb.sense, cb.rhs):
                return False
        if self.objective_constant != other.objective_constant:
            return False
        return self.objective == other.objective


def evaluate(model: MilpModel, point: dict[int, float], tol: float = 1e-6) -> EvalResult:
    """Check ``point`` against every row and bound of ``model``.

    Returns the objective value at the point and all breaches larger
    than ``tol``.  Variables missing from the point count as 0.  This is
    the independent certificate used on every reported solution: it
    never consults the solver.
    """
    violations: list[Violation] = []
    for v in model.variables:
        x = point.get(v.id, 0.0)
        if x < v.lower - tol:
            violations.append(Violation(f"bound_lower:{v.name}", "bound", v.lower - x))
        if x > v.upper + tol:
            violations.append(Violation(f"bound_upper:{v.name}", "bound", x - v.upper))
    for con in model.constraints:
        lhs = sum(coef * point.get(vid, 0.0) for vid, coef in con.terms)
        if con.sense == "<=":
            breach = lhs - con.rhs
        elif con.sense == ">=":
            breach = con.rhs - lhs
        else:
            breach = abs(lhs - con.rhs)
        if breach > tol:
            violations.append(Violation(con.name, "row", breach))
    return EvalResult(model.objective_value(point), violations)


# ---------------------------------------------------------------------------
# MPS serialization
# ---------------------------------------------------------------------------

_OBJ_ROW = "COST"
_RHS_SET = "RHS"
_BND_SET = "BND"


def _num(x: float) -> str:
    # 17 significant digits round-trips any double exactly
    return f"{x:.17g}"


def _mps_names(names: list[str], what: str) -> list[str]:
    """Truncate to the MPS name limit and reject collisions after truncation."""
    out = []
    seen: dict[str, str] = {}
    for name in names:
        short = name[:MAX_NAME_LEN]
        if short in seen and seen[short] != name:
            raise ValueError(
                f"{what} names {seen[short]!r} and {name!r} collide after "
                f"truncation to {MAX_NAME_LEN} characters"
            )
        seen[short] = name
        out.append(short)
    return out


def export_mps(model: MilpModel) -> str:
    """Serialize to MPS text (free spacing, fixed section layout).

    Integer columns are wrapped in INTORG/INTEND markers.  Bounds are
    written explicitly for every variable whose bounds differ from the
    continuous default [0, +inf), plus all binaries, so the file does
    not depend on reader-specific integer-bound defaults.
    """
    row_names = _mps_names([c.name for c in model.constraints], "constraint")
    col_names = _mps_names([v.name for v in model.variables], "variable")
    if _OBJ_ROW in row_names:
        raise ValueError(f"constraint name {_OBJ_ROW!r} is reserved for the objective row")

    lines = [f"NAME          {model.name}"]
    lines.append("ROWS")
    lines.append(f" N  {_OBJ_ROW}")
    sense_code = {"<=": "L", ">=": "G", "=": "E"}
    for con, rname in zip(model.constraints, row_names):
        lines.append(f" {sense_code[con.sense]}  {rname}")

    # column-major coefficient lists
    col_entries: list[list[tuple[str, float]]] = [[] for _ in model.variables]
    for vid, coef in sorted(model.objective.items()):
        col_entries[vid].append((_OBJ_ROW, coef))
    for con, rname in zip(model.constraints, row_names):
        for vid, coef in con.terms:
            col_entries[vid].append((rname, coef))

    lines.append("COLUMNS")
    in_int = False
    marker_no = 0
    for v, cname in zip(model.variables, col_names):
        want_int = v.kind == BINARY
        if want_int != in_int:
            tag = "INTORG" if want_int else "INTEND"
            lines.append(f"    MARKER{marker_no:04d}  'MARKER'                 '{tag}'")
            marker_no += 1
            in_int = want_int
        entries = col_entries[v.id]
        if not entries:
            # keep empty columns visible to the reader
            entries = [(_OBJ_ROW, 0.0)]
        for rname, coef in entries:
            lines.append(f"    {cname:<10}  {rname:<10}  {_num(coef)}")
    if in_int:
        lines.append(f"    MARKER{marker_no:04d}  'MARKER'                 'INTEND'")

    lines.append("RHS")
    if model.objective_constant != 0.0:
        # MPS convention: objective-row RHS stores the negated constant
        lines.append(f"    {_RHS_SET:<10}  {_OBJ_ROW:<10}  {_num(-model.objective_constant)}")
    for con, rname in zip(model.constraints, row_names):
        if con.rhs != 0.0:
            lines.append(f"    {_RHS_SET:<10}  {rname:<10}  {_num(con.rhs)}")

    lines.append("BOUNDS")
    for v, cname in zip(model.variables, col_names):
        lo, up = v.lower, v.upper
        if v.kind == CONTINUOUS and lo == 0.0 and math.isinf(up) and up > 0:
            continue
        if lo == up:
            lines.append(f" FX {_BND_SET:<10}  {cname:<10}  {_num(lo)}")
            continue
        if math.isinf(lo) and math.isinf(up):
            lines.append(f" FR {_BND_SET:<10}  {cname:<10}")
            continue
        if math.isinf(lo):
            lines.append(f" MI {_BND_SET:<10}  {cname:<10}")
        elif lo != 0.0 or v.kind == BINARY:
            lines.append(f" LO {_BND_SET:<10}  {cname:<10}  {_num(lo)}")
        if not math.isinf(up):
            lines.append(f" UP {_BND_SET:<10}  {cname:<10}  {_num(up)}")

    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def parse_mps(text: str) -> MilpModel:
    """Parse MPS text produced by :func:`export_mps` or a compatible writer.

    Raises :class:`MpsFormatError` with a line number on malformed input.
    """
    model: MilpModel | None = None
    section = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    obj_row: str | None = None
    col_kind: dict[str, str] = {}
    col_order: list[str] = []
    col_terms: dict[str, list[tuple[str, float]]] = {}
    col_obj: dict[str, float] = {}
    rhs_vals: dict[str, float] = {}
    obj_rhs = 0.0
    bounds: dict[str, list[tuple[str, float]]] = {}
    in_int = False
    seen_endata = False

    def parse_float(tok: str, line_no: int) -> float:
        try:
            return float(tok)
        except ValueError:
            raise MpsFormatError(line_no, f"expected a number, got {tok!r}") from None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if seen_endata:
            raise MpsFormatError(line_no, "content after ENDATA")
        indented = raw[0] in (" ", "\t")
        fields = raw.split()
        if not indented:
            head = fields[0].upper()
            if head == "NAME":
                model = MilpModel(fields[1] if len(fields) > 1 else "model")
                continue
            if head in ("ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"):
                if model is None:
                    model = MilpModel("model")
                if head == "RANGES":
                    raise MpsFormatError(line_no, "RANGES sections are not supported")
                if head == "ENDATA":
                    seen_endata = True
                    section = None
                else:
                    section = head
                continue
            raise MpsFormatError(line_no, f"unknown section header {fields[0]!r}")

        if section == "ROWS":
            if len(fields) != 2:
                raise MpsFormatError(line_no, "ROWS entries need a type and a name")
            rtype, rname = fields[0].upper(), fields[1]
            if rtype == "N":
                if obj_row is None:
                    obj_row = rname
                # extra free rows are legal MPS; ignore them
                continue
            sense = {"L": "<=", "G": ">=", "E": "="}.get(rtype)
            if sense is None:
                raise MpsFormatError(line_no, f"unknown row type {fields[0]!r}")
            if rname in row_sense:
                raise MpsFormatError(line_no, f"duplicate row name {rname!r}")
            row_sense[rname] = sense
            row_order.append(rname)
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1].strip("'\"").upper() == "MARKER":
                tag = fields[-1].strip("'\"").upper()
                if tag == "INTORG":
                    in_int = True
                elif tag == "INTEND":
                    in_int = False
                else:
                    raise MpsFormatError(line_no, f"unknown marker {fields[-1]!r}")
                continue
            if len(fields) not in (3, 5):
                raise MpsFormatError(line_no, "COLUMNS entries need (column, row, value) groups")
            cname = fields[0]
            if cname not in col_kind:
                col_kind[cname] = BINARY if in_int else CONTINUOUS
                col_order.append(cname)
                col_terms[cname] = []
            for i in range(1, len(fields), 2):
                rname = fields[i]
                value = parse_float(fields[i + 1], line_no)
                if rname == obj_row:
                    col_obj[cname] = col_obj.get(cname, 0.0) + value
                elif rname in row_sense:
                    col_terms[cname].append((rname, value))
                else:
                    raise MpsFormatError(line_no, f"unknown row {rname!r} in COLUMNS")
        elif section == "RHS":
            if len(fields) not in (3, 5):
                raise MpsFormatError(line_no, "RHS entries need (set, row, value) groups")
            for i in range(1, len(fields), 2):
                rname = fields[i]
                value = parse_float(fields[i + 1], line_no)
                if rname == obj_row:
                    obj_rhs = value
                elif rname in row_sense:
                    rhs_vals[rname] = value
                else:
                    raise MpsFormatError(line_no, f"unknown row {rname!r} in RHS")
        elif section == "BOUNDS":
            btype = fields[0].upper()
            if btype in ("FR", "MI", "PL", "BV"):
                if len(fields) != 3:
                    raise MpsFormatError(line_no, f"{btype} bound needs (set, column)")
                cname, value = fields[2], 0.0
            else:
                if len(fields) != 4:
                    raise MpsFormatError(line_no, f"{btype} bound needs (set, column, value)")
                cname = fields[2]
                value = parse_float(fields[3], line_no)
            if cname not in col_kind:
                raise MpsFormatError(line_no, f"unknown column {cname!r} in BOUNDS")
            bounds.setdefault(cname, []).append((btype, value))
        elif section is None:
            raise MpsFormatError(line_no, "data before any section header")
        else:
            raise MpsFormatError(line_no, f"unexpected data in {section} section")

    if model is None:
        raise MpsFormatError(1, "empty MPS input")
    if not seen_endata:
        raise MpsFormatError(len(text.splitlines()) or 1, "missing ENDATA")

    # assemble: columns in file order, rows in ROWS order
    var_bounds: dict[str, tuple[float, float]] = {}
    for cname in col_order:
        kind = col_kind[cname]
        lo, up = (0.0, 1.0) if kind == BINARY else (0.0, math.inf)
        for btype, value in bounds.get(cname, ()):
            if btype == "LO":
                lo = value
            elif btype == "UP":
                up = value
                if value < 0.0 and lo == 0.0:
                    lo = -math.inf  # historical MPS quirk for bare negative UP
            elif btype == "FX":
                lo = up = value
            elif btype == "FR":
                lo, up = -math.inf, math.inf
            elif btype == "MI":
                lo = -math.inf
            elif btype == "PL":
                up = math.inf
            elif btype == "BV":
                lo, up = 0.0, 1.0
            else:
                raise MpsFormatError(1, f"unknown bound type {btype!r}")
        var_bounds[cname] = (lo, up)

    out = MilpModel(model.name)
    ids: dict[str, int] = {}
    for cname in col_order:
        lo, up = var_bounds[cname]
        ids[cname] = out.add_variable(cname, col_kind[cname], lo, up,
                                      objective=col_obj.get(cname, 0.0))
    out.objective_constant = -obj_rhs
    row_terms: dict[str, list[tuple[int, float]]] = {rname: [] for rname in row_order}
    for cname in col_order:
        vid = ids[cname]
        for rn, coef in col_terms[cname]:
            row_terms[rn].append((vid, coef))
    for rname in row_order:
        out.add_constraint(rname, row_terms[rname], row_sense[rname], rhs_vals.get(rname, 0.0))
    return out
