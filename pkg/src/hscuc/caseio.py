"""Plain-text formats: case files, profile tables, schedules.

A case is one file of sections plus sibling tab-separated profile files
for demand and wind, referenced by name and resolved relative to the
case file.  All numbers are written with 9 significant digits, enough
to round-trip every MW and per-unit quantity in use; parse followed by
serialize followed by parse is the identity on such data.

Parse errors always carry the 1-based line number (and the field within
the line where that is meaningful); they never surface as stray
exceptions from deeper layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from hscuc.grid import (
    Branch,
    Bus,
    Electrolyzer,
    FuelCell,
    Generator,
    GridCase,
    WindPlant,
    validate_case,
)
from hscuc.builder import Schedule


class CaseFormatError(ValueError):
    """Malformed case or profile text; pinpoints line (and field) on request."""

    def __init__(self, line_no: int, message: str, filename: str = ""):
        where = f"{filename}:" if filename else "line "
        super().__init__(f"{where}{line_no}: {message}")
        self.line_no = line_no
        self.filename = filename


class MissingProfileError(CaseFormatError):
    pass


def _fmt(x: float) -> str:
    if x != x:
        raise ValueError("cannot serialize NaN")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def _parse_num(tok: str, line_no: int, what: str, filename: str = "") -> float:
    try:
        return float(tok)
    except ValueError:
        raise CaseFormatError(
            line_no, f"{what}: expected a number, got {tok!r}", filename
        ) from None


def _parse_int(tok: str, line_no: int, what: str, filename: str = "") -> int:
    try:
        return int(tok)
    except ValueError:
        raise CaseFormatError(
            line_no, f"{what}: expected an integer, got {tok!r}", filename
        ) from None


# ---------------------------------------------------------------------------
# profile tables
# ---------------------------------------------------------------------------


@dataclass
class ProfileTable:
    """Columns of per-period values; header names identify each series."""

    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def series(self, name: str) -> tuple[float, ...]:
        try:
            j = self.columns.index(name)
        except ValueError:
            raise KeyError(f"profile table has no series {name!r}") from None
        return tuple(row[j] for row in self.rows)


def parse_profiles(text: str, filename: str = "") -> ProfileTable:
    """Parse a tab- or space-separated profile table with a header row."""
    table: ProfileTable | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if table is None:
            if len(set(fields)) != len(fields):
                raise CaseFormatError(line_no, "duplicate series names in header", filename)
            table = ProfileTable(columns=fields)
            continue
        if len(fields) != len(table.columns):
            raise CaseFormatError(
                line_no,
                f"expected {len(table.columns)} values, got {len(fields)}",
                filename,
            )
        row = []
        for j, tok in enumerate(fields):
            v = _parse_num(tok, line_no, f"series {table.columns[j]!r}", filename)
            if not math.isfinite(v):
                raise CaseFormatError(
                    line_no, f"series {table.columns[j]!r}: non-finite value", filename
                )
            row.append(v)
        table.rows.append(row)
    if table is None:
        raise CaseFormatError(1, "empty profile table", filename)
    return table


def serialize_profiles(table: ProfileTable) -> str:
    lines = ["\t".join(table.columns)]
    for row in table.rows:
        lines.append("\t".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# case files
# ---------------------------------------------------------------------------

_TABLE_COLUMNS = {
    "buses": ("id", "base_kv", "slack"),
    "branches": ("id", "from", "to", "x_pu", "cap_mw"),
    "generators": ("id", "bus", "p_min", "p_max", "ramp_hr", "ramp_10m",
                   "c_energy", "c_no_load", "c_startup", "co2", "u0", "p0"),
    "wind_plants": ("id", "bus", "series"),
    "electrolyzers": ("id", "bus", "p_max", "efficiency"),
    "fuel_cells": ("id", "bus", "p_max", "efficiency"),
}
_KV_SECTIONS = ("meta", "hydrogen")
_SECTIONS = tuple(_TABLE_COLUMNS) + _KV_SECTIONS


@dataclass
class CaseFiles:
    """A serialized case: the main text plus named sibling profile files."""

    case_text: str
    profiles: dict[str, str]

    def write_to(self, directory: str | Path, case_name: str = "case.case") -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        main = directory / case_name
        main.write_text(self.case_text)
        for name, text in self.profiles.items():
            (directory / name).write_text(text)
        return main


def parse_case(
    text: str,
    files: dict[str, str] | None = None,
    base_dir: str | Path | None = None,
) -> GridCase:
    """Parse case text into a :class:`GridCase`.

    Profile files referenced from ``[meta]`` are looked up first in
    ``files`` (an in-memory name to text mapping), then on disk under
    ``base_dir``.  Raises :class:`CaseFormatError` for malformed input
    and :class:`MissingProfileError` when a referenced table cannot be
    found.  Semantic validity is the business of
    :func:`hscuc.grid.validate_case`, which :func:`load_case` applies.
    """
    section = None
    meta: dict[str, tuple[str, int]] = {}
    hydro: dict[str, tuple[str, int]] = {}
    tables: dict[str, list[tuple[int, list[str]]]] = {name: [] for name in _TABLE_COLUMNS}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise CaseFormatError(line_no, f"unterminated section header {line!r}")
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise CaseFormatError(line_no, f"unknown section [{section}]")
            continue
        if section is None:
            raise CaseFormatError(line_no, "data before any [section] header")
        if section in _KV_SECTIONS:
            if "=" not in line:
                raise CaseFormatError(line_no, f"expected key = value in [{section}]")
            key, _, value = line.partition("=")
            target = meta if section == "meta" else hydro
            target[key.strip()] = (value.strip(), line_no)
        else:
            cols = _TABLE_COLUMNS[section]
            fields = line.split()
            if len(fields) != len(cols):
                raise CaseFormatError(
                    line_no,
                    f"[{section}] row needs {len(cols)} fields "
                    f"({' '.join(cols)}), got {len(fields)}",
                )
            tables[section].append((line_no, fields))

    def meta_get(key: str, required: bool = True, default: str = "") -> tuple[str, int]:
        if key in meta:
            return meta[key]
        if required:
            raise CaseFormatError(1, f"[meta] is missing required key {key!r}")
        return default, 1

    name, _ = meta_get("name", required=False, default="unnamed")
    base_tok, ln = meta_get("mva_base")
    mva_base = _parse_num(base_tok, ln, "mva_base")
    horizon_tok, ln = meta_get("horizon")
    horizon = _parse_int(horizon_tok, ln, "horizon")

    def load_table(key: str, required: bool) -> ProfileTable | None:
        if key not in meta:
            if required:
                raise CaseFormatError(1, f"[meta] is missing required key {key!r}")
            return None
        fname, ln = meta[key]
        if files and fname in files:
            return parse_profiles(files[fname], fname)
        if base_dir is not None:
            path = Path(base_dir) / fname
            if path.exists():
                return parse_profiles(path.read_text(), fname)
        raise MissingProfileError(ln, f"profile file {fname!r} not found")

    need_demand = bool(tables["buses"])
    demand_table = load_table("demand_profile", required=need_demand)
    wind_table = load_table("wind_profile", required=bool(tables["wind_plants"]))

    buses = []
    for ln, f in tables["buses"]:
        buses.append(Bus(
            id=_parse_int(f[0], ln, "bus id"),
            base_kv=_parse_num(f[1], ln, "base_kv"),
            is_slack=_parse_int(f[2], ln, "slack flag") != 0,
        ))
    branches = []
    for ln, f in tables["branches"]:
        branches.append(Branch(
            id=_parse_int(f[0], ln, "branch id"),
            from_bus=_parse_int(f[1], ln, "from bus"),
            to_bus=_parse_int(f[2], ln, "to bus"),
            reactance_pu=_parse_num(f[3], ln, "reactance"),
            capacity_mw=_parse_num(f[4], ln, "capacity"),
        ))
    generators = []
    for ln, f in tables["generators"]:
        generators.append(Generator(
            id=_parse_int(f[0], ln, "generator id"),
            bus=_parse_int(f[1], ln, "generator bus"),
            p_min=_parse_num(f[2], ln, "p_min"),
            p_max=_parse_num(f[3], ln, "p_max"),
            ramp_hourly=_parse_num(f[4], ln, "ramp_hr"),
            ramp_10min=_parse_num(f[5], ln, "ramp_10m"),
            cost_energy=_parse_num(f[6], ln, "c_energy"),
            cost_no_load=_parse_num(f[7], ln, "c_no_load"),
            cost_startup=_parse_num(f[8], ln, "c_startup"),
            co2_rate=_parse_num(f[9], ln, "co2"),
            initial_on=_parse_int(f[10], ln, "u0"),
            initial_output=_parse_num(f[11], ln, "p0"),
        ))
    wind_plants = []
    for ln, f in tables["wind_plants"]:
        series = f[2]
        try:
            profile = wind_table.series(series) if wind_table else ()
        except KeyError:
            raise CaseFormatError(
                ln, f"wind profile file has no series {series!r}"
            ) from None
        wind_plants.append(WindPlant(
            id=_parse_int(f[0], ln, "wind plant id"),
            bus=_parse_int(f[1], ln, "wind plant bus"),
            profile=profile,
        ))
    electrolyzers = []
    for ln, f in tables["electrolyzers"]:
        electrolyzers.append(Electrolyzer(
            id=_parse_int(f[0], ln, "electrolyzer id"),
            bus=_parse_int(f[1], ln, "electrolyzer bus"),
            p_max=_parse_num(f[2], ln, "p_max"),
            efficiency=_parse_num(f[3], ln, "efficiency"),
        ))
    fuel_cells = []
    for ln, f in tables["fuel_cells"]:
        fuel_cells.append(FuelCell(
            id=_parse_int(f[0], ln, "fuel cell id"),
            bus=_parse_int(f[1], ln, "fuel cell bus"),
            p_max=_parse_num(f[2], ln, "p_max"),
            efficiency=_parse_num(f[3], ln, "efficiency"),
        ))

    demand: dict[int, tuple[float, ...]] = {}
    if demand_table is not None:
        bus_ids = {b.id for b in buses}
        for col in demand_table.columns:
            if not col.startswith("b"):
                raise CaseFormatError(
                    1, f"demand series {col!r} must be named b<bus id>",
                    meta.get("demand_profile", ("", 1))[0],
                )
            bus = _parse_int(col[1:], 1, f"demand series {col!r}")
            if bus not in bus_ids:
                raise CaseFormatError(1, f"demand series {col!r}: unknown bus {bus}")
            demand[bus] = demand_table.series(col)

    e_initial = 0.0
    e_max = None
    if "e_initial" in hydro:
        tok, ln = hydro["e_initial"]
        e_initial = _parse_num(tok, ln, "e_initial")
    if "e_max" in hydro:
        tok, ln = hydro["e_max"]
        if tok.lower() not in ("none", "unlimited"):
            e_max = _parse_num(tok, ln, "e_max")

    return GridCase(
        name=name,
        mva_base=mva_base,
        horizon=horizon,
        buses=tuple(buses),
        branches=tuple(branches),
        generators=tuple(generators),
        demand=demand,
        wind_plants=tuple(wind_plants),
        electrolyzers=tuple(electrolyzers),
        fuel_cells=tuple(fuel_cells),
        hydrogen_e_initial=e_initial,
        hydrogen_e_max=e_max,
    )


def serialize_case(
    case: GridCase,
    demand_file: str = "demand.tsv",
    wind_file: str = "wind.tsv",
) -> CaseFiles:
    """Render a case to its text representation (main file plus profiles)."""
    out = []
    out.append("[meta]")
    out.append(f"name = {case.name}")
    out.append(f"mva_base = {_fmt(case.mva_base)}")
    out.append(f"horizon = {case.horizon}")
    if case.demand:
        out.append(f"demand_profile = {demand_file}")
    if case.wind_plants:
        out.append(f"wind_profile = {wind_file}")
    out.append("")
    out.append("[buses]")
    out.append("# id  base_kv  slack")
    for b in case.buses:
        out.append(f"{b.id}  {_fmt(b.base_kv)}  {1 if b.is_slack else 0}")
    out.append("")
    out.append("[branches]")
    out.append("# id  from  to  x_pu  cap_mw")
    for br in case.branches:
        out.append(
            f"{br.id}  {br.from_bus}  {br.to_bus}  "
            f"{_fmt(br.reactance_pu)}  {_fmt(br.capacity_mw)}"
        )
    out.append("")
    out.append("[generators]")
    out.append("# id  bus  p_min  p_max  ramp_hr  ramp_10m  c_energy  c_no_load"
               "  c_startup  co2  u0  p0")
    for g in case.generators:
        out.append(
            f"{g.id}  {g.bus}  {_fmt(g.p_min)}  {_fmt(g.p_max)}  "
            f"{_fmt(g.ramp_hourly)}  {_fmt(g.ramp_10min)}  {_fmt(g.cost_energy)}  "
            f"{_fmt(g.cost_no_load)}  {_fmt(g.cost_startup)}  {_fmt(g.co2_rate)}  "
            f"{g.initial_on}  {_fmt(g.initial_output)}"
        )
    profiles: dict[str, str] = {}
    if case.wind_plants:
        out.append("")
        out.append("[wind_plants]")
        out.append("# id  bus  series")
        cols, rows = [], []
        for w in case.wind_plants:
            out.append(f"{w.id}  {w.bus}  w{w.id}")
            cols.append(f"w{w.id}")
        for t in range(case.horizon):
            rows.append([w.profile[t] for w in case.wind_plants])
        profiles[wind_file] = serialize_profiles(ProfileTable(cols, rows))
    if case.electrolyzers:
        out.append("")
        out.append("[electrolyzers]")
        out.append("# id  bus  p_max  efficiency")
        for e in case.electrolyzers:
            out.append(f"{e.id}  {e.bus}  {_fmt(e.p_max)}  {_fmt(e.efficiency)}")
    if case.fuel_cells:
        out.append("")
        out.append("[fuel_cells]")
        out.append("# id  bus  p_max  efficiency")
        for f in case.fuel_cells:
            out.append(f"{f.id}  {f.bus}  {_fmt(f.p_max)}  {_fmt(f.efficiency)}")
    if case.hydrogen_e_initial != 0.0 or case.hydrogen_e_max is not None:
        out.append("")
        out.append("[hydrogen]")
        out.append(f"e_initial = {_fmt(case.hydrogen_e_initial)}")
        if case.hydrogen_e_max is not None:
            out.append(f"e_max = {_fmt(case.hydrogen_e_max)}")
    if case.demand:
        loaded = sorted(case.demand)
        cols = [f"b{n}" for n in loaded]
        rows = [[case.demand[n][t] for n in loaded] for t in range(case.horizon)]
        profiles[demand_file] = serialize_profiles(ProfileTable(cols, rows))
    return CaseFiles(case_text="\n".join(out) + "\n", profiles=profiles)


def load_case(path: str | Path) -> GridCase:
    """Read a case file from disk, resolve its profiles, and validate it."""
    path = Path(path)
    case = parse_case(path.read_text(), base_dir=path.parent)
    validate_case(case).raise_if_failed()
    return case


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------


def write_schedule(schedule: Schedule) -> str:
    """Render a schedule as per-period sections of labeled values."""
    out = ["[meta]"]
    out.append(f"variant = {schedule.variant}")
    out.append(f"horizon = {schedule.horizon}")
    out.append(f"total_cost = {schedule.total_cost:.2f}")
    for t in range(schedule.horizon):
        out.append("")
        out.append(f"[period {t + 1}]")

        def row(tag: str, items: dict[int, tuple], prefix: str, fmt: str = "%.9g"):
            if not items:
                return
            cells = " ".join(
                f"{prefix}{k}={fmt % vals[t]}" for k, vals in sorted(items.items())
            )
            out.append(f"{tag:<6s}{cells}")

        row("u", schedule.u, "g", "%d")
        row("v", schedule.v, "g", "%d")
        row("p", schedule.p, "g")
        row("r", schedule.reserve, "g")
        row("flow", schedule.flow, "k")
        row("theta", schedule.theta, "n")
        row("avail", schedule.wind_available, "w")
        row("cur", schedule.curtail, "w")
        row("pe", schedule.pe, "e")
        row("pf", schedule.pf, "f")
        if schedule.e_sys is not None:
            out.append(f"{'e':<6s}sys={schedule.e_sys[t]:.9g}")
        if schedule.e_node is not None:
            cells = " ".join(
                f"n{n}={vals[t]:.9g}" for n, vals in sorted(schedule.e_node.items())
            )
            out.append(f"{'e':<6s}{cells}")
        if schedule.slack_pos is not None:
            used = {
                n: vals for n, vals in schedule.slack_pos.items() if any(vals)
            }
            row("dgen", used, "n")
        if schedule.slack_neg is not None:
            used = {
                n: vals for n, vals in schedule.slack_neg.items() if any(vals)
            }
            row("dshed", used, "n")
    return "\n".join(out) + "\n"


def read_schedule(text: str) -> tuple[dict[str, str], list[dict[str, dict[str, float]]]]:
    """Parse schedule text back into (meta, per-period value maps).

    The period list holds one dict per period mapping each tag (``u``,
    ``p``, ``flow``, ...) to its labeled values, e.g.
    ``periods[0]["p"]["g3"] == 120.0``.
    """
    meta: dict[str, str] = {}
    periods: list[dict[str, dict[str, float]]] = []
    current: dict[str, dict[str, float]] | None = None
    in_meta = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            inner = line.strip("[]").strip()
            if inner == "meta":
                in_meta = True
                current = None
            elif inner.startswith("period"):
                in_meta = False
                current = {}
                periods.append(current)
            else:
                raise CaseFormatError(line_no, f"unknown schedule section {line!r}")
            continue
        if in_meta:
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
            continue
        if current is None:
            raise CaseFormatError(line_no, "schedule data before any section")
        fields = line.split()
        tag = fields[0]
        values: dict[str, float] = {}
        for cell in fields[1:]:
            label, _, tok = cell.partition("=")
            values[label] = _parse_num(tok, line_no, f"{tag} {label}")
        current.setdefault(tag, {}).update(values)
    return meta, periods
