"""Power system data model for day-ahead commitment studies.

All records are frozen dataclasses holding plain numbers and tuples, so
cases compare by value and cannot be mutated behind a solver's back.
Time series are tuples with one entry per scheduling period (hourly over
``horizon`` periods).  Power is MW, energy MWh, reactance per unit on
``mva_base``, costs are $ quantities, emission rates lbs per MWh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


class Variant:
    """The four commitment formulations.

    * ``r-scuc``: copper-plate relaxation, no line limits, no hydrogen.
    * ``t-scuc``: network-constrained commitment, no hydrogen.
    * ``eh-scuc``: hydrogen converters confined to their own bus (one
      isolated storage per hub bus).
    * ``h-scuc``: hydrogen converters coupled through a shared pipeline
      storage, so stored energy also moves between buses.
    """

    RELAXED = "r-scuc"
    TRADITIONAL = "t-scuc"
    ENERGY_HUB = "eh-scuc"
    HYDROGEN = "h-scuc"
    ALL = (RELAXED, TRADITIONAL, ENERGY_HUB, HYDROGEN)

    _LABELS = {
        RELAXED: "R-SCUC",
        TRADITIONAL: "T-SCUC",
        ENERGY_HUB: "EH-SCUC",
        HYDROGEN: "H-SCUC",
    }

    @classmethod
    def check(cls, variant: str) -> str:
        if variant not in cls.ALL:
            raise ValueError(
                f"unknown variant {variant!r}; expected one of {', '.join(cls.ALL)}"
            )
        return variant

    @classmethod
    def label(cls, variant: str) -> str:
        return cls._LABELS[cls.check(variant)]


@dataclass(frozen=True)
class Bus:
    id: int
    base_kv: float
    is_slack: bool = False


@dataclass(frozen=True)
class Branch:
    """Transmission element between two buses (line or transformer)."""

    id: int
    from_bus: int
    to_bus: int
    reactance_pu: float
    capacity_mw: float


@dataclass(frozen=True)
class Generator:
    """Thermal unit with commitment state.

    ``initial_on`` and ``initial_output`` describe the hour before the
    horizon starts; ramp and startup logic at t=1 are anchored to them.
    ``ramp_10min`` caps the 10-minute spinning reserve offer.
    """

    id: int
    bus: int
    p_min: float
    p_max: float
    ramp_hourly: float
    ramp_10min: float
    cost_energy: float
    cost_no_load: float
    cost_startup: float
    co2_rate: float
    initial_on: int
    initial_output: float


@dataclass(frozen=True)
class WindPlant:
    id: int
    bus: int
    profile: tuple[float, ...]  # available MW per period


@dataclass(frozen=True)
class Electrolyzer:
    """Power-to-hydrogen converter; ``efficiency`` is MWh stored per MWh drawn."""

    id: int
    bus: int
    p_max: float
    efficiency: float


@dataclass(frozen=True)
class FuelCell:
    """Hydrogen-to-power converter; ``efficiency`` is MWh delivered per MWh drawn."""

    id: int
    bus: int
    p_max: float
    efficiency: float


@dataclass(frozen=True)
class GridCase:
    """A complete study case.

    ``demand`` maps bus id to a per-period MW profile; buses absent from
    the mapping carry no load.  ``hydrogen_e_max`` of ``None`` means the
    storage is not capacity-limited.
    """

    name: str
    mva_base: float
    horizon: int
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...]
    demand: dict[int, tuple[float, ...]]
    wind_plants: tuple[WindPlant, ...] = ()
    electrolyzers: tuple[Electrolyzer, ...] = ()
    fuel_cells: tuple[FuelCell, ...] = ()
    hydrogen_e_initial: float = 0.0
    hydrogen_e_max: float | None = None

    def bus_by_id(self) -> dict[int, Bus]:
        return {b.id: b for b in self.buses}

    def slack_bus(self) -> int:
        for b in self.buses:
            if b.is_slack:
                return b.id
        raise ValueError("case has no slack bus")

    def demand_at(self, bus: int, t: int) -> float:
        prof = self.demand.get(bus)
        return prof[t] if prof else 0.0

    def total_demand(self, t: int) -> float:
        return sum(prof[t] for prof in self.demand.values())

    def total_demand_energy(self) -> float:
        return sum(sum(prof) for prof in self.demand.values())

    def total_wind_energy(self) -> float:
        return sum(sum(w.profile) for w in self.wind_plants)

    def hub_buses(self) -> tuple[int, ...]:
        """Buses hosting at least one hydrogen converter, ascending."""
        seen = {e.bus for e in self.electrolyzers} | {f.bus for f in self.fuel_cells}
        return tuple(sorted(seen))


@dataclass
class Problem:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass
class ValidationReport:
    problems: list[Problem] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def add(self, path: str, message: str) -> None:
        self.problems.append(Problem(path, message))

    def raise_if_failed(self) -> None:
        if not self.ok:
            summary = "; ".join(str(p) for p in self.problems[:8])
            more = f" (+{len(self.problems) - 8} more)" if len(self.problems) > 8 else ""
            raise CaseValidationError(f"invalid case: {summary}{more}", self.problems)


class CaseValidationError(ValueError):
    def __init__(self, message: str, problems: list[Problem] | None = None):
        super().__init__(message)
        self.problems = problems or []


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate_case(case: GridCase) -> ValidationReport:
    """Structural and physical sanity checks; returns all problems found."""
    rep = ValidationReport()
    if case.horizon < 1:
        rep.add("horizon", f"must be at least 1, got {case.horizon}")
    if not _finite(case.mva_base) or case.mva_base <= 0:
        rep.add("mva_base", f"must be positive, got {case.mva_base}")

    bus_ids = [b.id for b in case.buses]
    if not case.buses:
        rep.add("buses", "case has no buses")
    if len(set(bus_ids)) != len(bus_ids):
        rep.add("buses", "duplicate bus ids")
    known = set(bus_ids)
    slacks = [b.id for b in case.buses if b.is_slack]
    if len(slacks) != 1:
        rep.add("buses", f"exactly one slack bus required, found {len(slacks)}")

    seen_branch = set()
    for i, br in enumerate(case.branches):
        path = f"branches[{i}]"
        if br.id in seen_branch:
            rep.add(path, f"duplicate branch id {br.id}")
        seen_branch.add(br.id)
        if not _finite(br.reactance_pu) or br.reactance_pu <= 0:
            rep.add(f"{path}.reactance_pu", f"must be positive, got {br.reactance_pu}")
        if not _finite(br.capacity_mw) or br.capacity_mw <= 0:
            rep.add(f"{path}.capacity_mw", f"must be positive, got {br.capacity_mw}")
        for end, bus in (("from_bus", br.from_bus), ("to_bus", br.to_bus)):
            if bus not in known:
                rep.add(f"{path}.{end}", f"unknown bus {bus}")
        if br.from_bus == br.to_bus:
            rep.add(path, "self-loop branch")

    seen_gen = set()
    for i, g in enumerate(case.generators):
        path = f"generators[{i}]"
        if g.id in seen_gen:
            rep.add(path, f"duplicate generator id {g.id}")
        seen_gen.add(g.id)
        if g.bus not in known:
            rep.add(f"{path}.bus", f"unknown bus {g.bus}")
        if not _finite(g.p_min) or g.p_min < 0:
            rep.add(f"{path}.p_min", f"must be nonnegative, got {g.p_min}")
        if not _finite(g.p_max) or g.p_max <= 0 or g.p_max < g.p_min:
            rep.add(f"{path}.p_max", f"must be >= p_min and positive, got {g.p_max}")
        if not _finite(g.ramp_hourly) or g.ramp_hourly <= 0:
            rep.add(f"{path}.ramp_hourly", f"must be positive, got {g.ramp_hourly}")
        if not _finite(g.ramp_10min) or g.ramp_10min < 0:
            rep.add(f"{path}.ramp_10min", f"must be nonnegative, got {g.ramp_10min}")
        for fieldname in ("cost_energy", "cost_no_load", "cost_startup", "co2_rate"):
            v = getattr(g, fieldname)
            if not _finite(v) or v < 0:
                rep.add(f"{path}.{fieldname}", f"must be nonnegative, got {v}")
        if g.initial_on not in (0, 1):
            rep.add(f"{path}.initial_on", f"must be 0 or 1, got {g.initial_on}")
        elif g.initial_on == 0:
            if g.initial_output != 0:
                rep.add(f"{path}.initial_output",
                        "must be 0 when the unit starts offline")
        else:
            if not (g.p_min <= g.initial_output <= g.p_max):
                rep.add(f"{path}.initial_output",
                        f"{g.initial_output} outside [{g.p_min}, {g.p_max}]")

    for bus, prof in sorted(case.demand.items()):
        path = f"demand[{bus}]"
        if bus not in known:
            rep.add(path, f"unknown bus {bus}")
        if len(prof) != case.horizon:
            rep.add(path, f"profile has {len(prof)} periods, horizon is {case.horizon}")
        if any(not _finite(x) or x < 0 for x in prof):
            rep.add(path, "demand values must be finite and nonnegative")

    seen_wind = set()
    for i, w in enumerate(case.wind_plants):
        path = f"wind_plants[{i}]"
        if w.id in seen_wind:
            rep.add(path, f"duplicate wind plant id {w.id}")
        seen_wind.add(w.id)
        if w.bus not in known:
            rep.add(f"{path}.bus", f"unknown bus {w.bus}")
        if len(w.profile) != case.horizon:
            rep.add(f"{path}.profile",
                    f"has {len(w.profile)} periods, horizon is {case.horizon}")
        if any(not _finite(x) or x < 0 for x in w.profile):
            rep.add(f"{path}.profile", "availability must be finite and nonnegative")

    for label, devices in (("electrolyzers", case.electrolyzers),
                           ("fuel_cells", case.fuel_cells)):
        seen_dev = set()
        for i, d in enumerate(devices):
            path = f"{label}[{i}]"
            if d.id in seen_dev:
                rep.add(path, f"duplicate id {d.id}")
            seen_dev.add(d.id)
            if d.bus not in known:
                rep.add(f"{path}.bus", f"unknown bus {d.bus}")
            if not _finite(d.p_max) or d.p_max <= 0:
                rep.add(f"{path}.p_max", f"must be positive, got {d.p_max}")
            if not _finite(d.efficiency) or not (0.0 < d.efficiency <= 1.0):
                rep.add(f"{path}.efficiency", f"must lie in (0, 1], got {d.efficiency}")

    if not _finite(case.hydrogen_e_initial) or case.hydrogen_e_initial < 0:
        rep.add("hydrogen_e_initial", "must be nonnegative and finite")
    if case.hydrogen_e_max is not None:
        if not _finite(case.hydrogen_e_max) or case.hydrogen_e_max < 0:
            rep.add("hydrogen_e_max", "must be nonnegative and finite")
        elif case.hydrogen_e_max < case.hydrogen_e_initial:
            rep.add("hydrogen_e_max", "smaller than hydrogen_e_initial")

    if case.buses and len(slacks) == 1 and not rep.problems:
        missing = _unreachable_buses(case)
        if missing:
            rep.add("branches", f"network is not connected; unreachable buses {missing}")
    return rep


def _unreachable_buses(case: GridCase) -> list[int]:
    adj: dict[int, list[int]] = {b.id: [] for b in case.buses}
    for br in case.branches:
        adj[br.from_bus].append(br.to_bus)
        adj[br.to_bus].append(br.from_bus)
    start = case.buses[0].id
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return sorted(set(adj) - seen)


def wind_penetration(case: GridCase) -> float:
    """Available wind energy as a fraction of demand energy over the horizon."""
    demand = case.total_demand_energy()
    if demand <= 0:
        raise ValueError("case has no demand energy")
    return case.total_wind_energy() / demand


def scale_wind_to_penetration(case: GridCase, level: float) -> GridCase:
    """Uniformly rescale all wind profiles to hit an energy penetration level.

    ``level`` is the target ratio of available wind energy to demand
    energy, e.g. 0.30 for thirty percent.  Profile shapes are preserved.
    """
    if level < 0:
        raise ValueError(f"penetration level must be nonnegative, got {level}")
    demand = case.total_demand_energy()
    if demand <= 0:
        raise ValueError("case has no demand energy")
    wind = case.total_wind_energy()
    if wind <= 0:
        if level == 0:
            return case
        raise ValueError("case has no wind energy to scale")
    alpha = level * demand / wind
    plants = tuple(
        replace(w, profile=tuple(alpha * x for x in w.profile))
        for w in case.wind_plants
    )
    return replace(case, wind_plants=plants)
