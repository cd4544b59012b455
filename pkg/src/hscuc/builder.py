"""Commitment model construction for the four study variants.

Every variant shares the thermal core: commitment and startup binaries,
dispatch and 10-minute reserve, the reserve adequacy rule (committed
reserve must cover the loss of any single unit's dispatch plus its own
reserve), DC power flow through bus angles, hourly ramping anchored to
the pre-horizon state, and startup linking.  They differ in what the
network and the hydrogen side are allowed to do:

* ``r-scuc``   -- flows unbounded (single-market relaxation), no hydrogen.
* ``t-scuc``   -- flows limited by branch ratings, no hydrogen.
* ``eh-scuc``  -- limited flows plus converters whose storage is locked
  to the bus where the converter sits (one balance per hub bus).
* ``h-scuc``   -- limited flows plus converters coupled through a shared
  storage, so energy absorbed at one bus can be re-injected at another.

Simple range restrictions (branch ratings, curtailment caps, converter
and storage capacities) are realized as variable bounds rather than
matrix rows; the manifest reports them separately so row counts stay
comparable across variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from hscuc.grid import GridCase, Variant, validate_case
from hscuc.milp import BINARY, MilpModel

DIAGNOSTIC_SLACK_COST = 1e5  # $/MWh for emergency generation or shedding


class BuildError(ValueError):
    pass


class ScheduleError(ValueError):
    """A solver point failed the independent physics cross-checks."""


@dataclass
class VariableIndex:
    """Typed lookup from model entities to variable and row ids.

    Period indices are 0-based here and throughout the API; the 1-based
    labels appear only inside variable and constraint names.
    """

    variant: str
    horizon: int
    u_var: dict[tuple[int, int], int] = field(default_factory=dict)
    v_var: dict[tuple[int, int], int] = field(default_factory=dict)
    p_var: dict[tuple[int, int], int] = field(default_factory=dict)
    r_var: dict[tuple[int, int], int] = field(default_factory=dict)
    theta_var: dict[tuple[int, int], int] = field(default_factory=dict)
    flow_var: dict[tuple[int, int], int] = field(default_factory=dict)
    curtail_var: dict[tuple[int, int], int] = field(default_factory=dict)
    pe_var: dict[tuple[int, int], int] = field(default_factory=dict)
    pf_var: dict[tuple[int, int], int] = field(default_factory=dict)
    e_sys_var: dict[int, int] = field(default_factory=dict)
    e_node_var: dict[tuple[int, int], int] = field(default_factory=dict)
    slack_pos_var: dict[tuple[int, int], int] = field(default_factory=dict)
    slack_neg_var: dict[tuple[int, int], int] = field(default_factory=dict)
    nodal_row: dict[tuple[int, int], int] = field(default_factory=dict)

    def u(self, gen: int, t: int) -> int:
        return self.u_var[gen, t]

    def v(self, gen: int, t: int) -> int:
        return self.v_var[gen, t]

    def p(self, gen: int, t: int) -> int:
        return self.p_var[gen, t]

    def r(self, gen: int, t: int) -> int:
        return self.r_var[gen, t]

    def theta(self, bus: int, t: int) -> int:
        return self.theta_var[bus, t]

    def flow(self, branch: int, t: int) -> int:
        return self.flow_var[branch, t]

    def curtail(self, plant: int, t: int) -> int:
        return self.curtail_var[plant, t]


@dataclass
class BuildManifest:
    """What the builder wrote: rows and bound groups per constraint family."""

    variant: str
    horizon: int
    row_counts: dict[str, int]
    bound_counts: dict[str, int]
    variables: int
    binaries: int
    rows_total: int
    warnings: list[str] = field(default_factory=list)


@dataclass
class Schedule:
    """A dispatch plan extracted from a solver point and cross-checked.

    All mappings are keyed by entity id with one tuple entry per period.
    ``e_sys`` is populated for the shared-storage variant, ``e_node``
    for the per-bus variant; the other is None.
    """

    variant: str
    horizon: int
    total_cost: float
    u: dict[int, tuple[int, ...]]
    v: dict[int, tuple[int, ...]]
    p: dict[int, tuple[float, ...]]
    reserve: dict[int, tuple[float, ...]]
    theta: dict[int, tuple[float, ...]]
    flow: dict[int, tuple[float, ...]]
    wind_available: dict[int, tuple[float, ...]]
    curtail: dict[int, tuple[float, ...]]
    pe: dict[int, tuple[float, ...]]
    pf: dict[int, tuple[float, ...]]
    e_sys: tuple[float, ...] | None = None
    e_node: dict[int, tuple[float, ...]] | None = None
    slack_pos: dict[int, tuple[float, ...]] | None = None
    slack_neg: dict[int, tuple[float, ...]] | None = None

    def curtailment_total(self) -> float:
        return sum(sum(prof) for prof in self.curtail.values())


def _uses_network_limits(variant: str) -> bool:
    return variant != Variant.RELAXED


def _uses_hydrogen(variant: str) -> bool:
    return variant in (Variant.ENERGY_HUB, Variant.HYDROGEN)


def build(
    case: GridCase,
    variant: str,
    diagnostic: bool = False,
) -> tuple[MilpModel, VariableIndex, BuildManifest]:
    """Construct the commitment MILP for ``case`` under ``variant``.

    ``diagnostic`` adds a pair of expensive slack injections (emergency
    generation and load shedding) to every nodal balance so infeasible
    situations can be localized instead of merely reported.
    """
    Variant.check(variant)
    validate_case(case).raise_if_failed()

    T = case.horizon
    hydrogen = _uses_hydrogen(variant)
    limits = _uses_network_limits(variant)
    warnings: list[str] = []
    if not hydrogen and (case.electrolyzers or case.fuel_cells):
        warnings.append(
            f"{len(case.electrolyzers)} electrolyzers and "
            f"{len(case.fuel_cells)} fuel cells ignored by variant {variant}"
        )

    model = MilpModel(f"{case.name}:{variant}")
    ix = VariableIndex(variant=variant, horizon=T)
    rows: dict[str, int] = {
        "gen_min": 0, "gen_max_reserve": 0, "reserve_cap": 0,
        "reserve_requirement": 0, "flow_definition": 0, "nodal_balance": 0,
        "ramp_up": 0, "ramp_down": 0, "startup_link": 0,
        "h2_system_balance": 0, "h2_hub_balance": 0,
    }
    bounds: dict[str, int] = {
        "flow_limit": 0, "curtail_limit": 0, "electrolyzer_cap": 0,
        "fuel_cell_cap": 0, "h2_storage_cap": 0, "h2_hub_storage_cap": 0,
    }

    slack_bus = case.slack_bus()
    hubs = case.hub_buses() if hydrogen else ()

    # -- variables, one family at a time ------------------------------

    for g in case.generators:
        for t in range(T):
            ix.u_var[g.id, t] = model.add_variable(
                f"u_g{g.id}_t{t + 1}", BINARY, 0.0, 1.0, objective=g.cost_no_load
            )
    for g in case.generators:
        for t in range(T):
            ix.v_var[g.id, t] = model.add_variable(
                f"v_g{g.id}_t{t + 1}", BINARY, 0.0, 1.0, objective=g.cost_startup
            )
    for g in case.generators:
        for t in range(T):
            ix.p_var[g.id, t] = model.add_variable(
                f"pg_g{g.id}_t{t + 1}", lower=0.0, upper=g.p_max,
                objective=g.cost_energy,
            )
    for g in case.generators:
        for t in range(T):
            ix.r_var[g.id, t] = model.add_variable(
                f"r_g{g.id}_t{t + 1}", lower=0.0, upper=g.ramp_10min
            )
    for b in case.buses:
        for t in range(T):
            if b.id == slack_bus:
                lo = up = 0.0  # angle reference
            else:
                lo, up = -math.inf, math.inf
            ix.theta_var[b.id, t] = model.add_variable(
                f"th_n{b.id}_t{t + 1}", lower=lo, upper=up
            )
    for br in case.branches:
        cap = br.capacity_mw if limits else math.inf
        for t in range(T):
            ix.flow_var[br.id, t] = model.add_variable(
                f"pk_k{br.id}_t{t + 1}", lower=-cap, upper=cap
            )
        if limits:
            bounds["flow_limit"] += T
    for w in case.wind_plants:
        for t in range(T):
            ix.curtail_var[w.id, t] = model.add_variable(
                f"cur_w{w.id}_t{t + 1}", lower=0.0, upper=w.profile[t]
            )
        bounds["curtail_limit"] += T
    if hydrogen:
        for e in case.electrolyzers:
            for t in range(T):
                ix.pe_var[e.id, t] = model.add_variable(
                    f"pe_e{e.id}_t{t + 1}", lower=0.0, upper=e.p_max
                )
            bounds["electrolyzer_cap"] += T
        for f in case.fuel_cells:
            for t in range(T):
                ix.pf_var[f.id, t] = model.add_variable(
                    f"pf_f{f.id}_t{t + 1}", lower=0.0, upper=f.p_max
                )
            bounds["fuel_cell_cap"] += T
        if variant == Variant.HYDROGEN:
            e_cap = math.inf if case.hydrogen_e_max is None else case.hydrogen_e_max
            for t in range(T):
                ix.e_sys_var[t] = model.add_variable(
                    f"eh2_t{t + 1}", lower=0.0, upper=e_cap
                )
            bounds["h2_storage_cap"] += T
        else:
            # per-hub storage; the system inventory splits evenly
            share = 1.0 / len(hubs) if hubs else 0.0
            e_cap = (
                math.inf if case.hydrogen_e_max is None
                else case.hydrogen_e_max * share
            )
            for n in hubs:
                for t in range(T):
                    ix.e_node_var[n, t] = model.add_variable(
                        f"eh2_n{n}_t{t + 1}", lower=0.0, upper=e_cap
                    )
                bounds["h2_hub_storage_cap"] += T
    if diagnostic:
        for b in case.buses:
            for t in range(T):
                ix.slack_pos_var[b.id, t] = model.add_variable(
                    f"dgen_n{b.id}_t{t + 1}", lower=0.0,
                    objective=DIAGNOSTIC_SLACK_COST,
                )
                ix.slack_neg_var[b.id, t] = model.add_variable(
                    f"dshed_n{b.id}_t{t + 1}", lower=0.0,
                    objective=DIAGNOSTIC_SLACK_COST,
                )

    # -- rows ----------------------------------------------------------

    for g in case.generators:
        for t in range(T):
            model.add_constraint(
                f"pmin_g{g.id}_t{t + 1}",
                [(ix.p_var[g.id, t], 1.0), (ix.u_var[g.id, t], -g.p_min)],
                ">=", 0.0,
            )
            rows["gen_min"] += 1
    for g in case.generators:
        for t in range(T):
            model.add_constraint(
                f"pmaxr_g{g.id}_t{t + 1}",
                [(ix.p_var[g.id, t], 1.0), (ix.r_var[g.id, t], 1.0),
                 (ix.u_var[g.id, t], -g.p_max)],
                "<=", 0.0,
            )
            rows["gen_max_reserve"] += 1
    for g in case.generators:
        for t in range(T):
            model.add_constraint(
                f"rcap_g{g.id}_t{t + 1}",
                [(ix.r_var[g.id, t], 1.0), (ix.u_var[g.id, t], -g.ramp_10min)],
                "<=", 0.0,
            )
            rows["reserve_cap"] += 1
    # committed reserve covers losing any one unit's dispatch plus its
    # own reserve; the victim's reserve cancels, leaving everyone else's
    for g in case.generators:
        for t in range(T):
            terms = [(ix.r_var[m.id, t], 1.0)
                     for m in case.generators if m.id != g.id]
            terms.append((ix.p_var[g.id, t], -1.0))
            model.add_constraint(f"rreq_g{g.id}_t{t + 1}", terms, ">=", 0.0)
            rows["reserve_requirement"] += 1
    for br in case.branches:
        inv_x = 1.0 / br.reactance_pu
        for t in range(T):
            model.add_constraint(
                f"fdef_k{br.id}_t{t + 1}",
                [(ix.flow_var[br.id, t], 1.0),
                 (ix.theta_var[br.from_bus, t], -inv_x),
                 (ix.theta_var[br.to_bus, t], inv_x)],
                "=", 0.0,
            )
            rows["flow_definition"] += 1

    gens_at: dict[int, list] = {}
    for g in case.generators:
        gens_at.setdefault(g.bus, []).append(g)
    wind_at: dict[int, list] = {}
    for w in case.wind_plants:
        wind_at.setdefault(w.bus, []).append(w)
    elec_at: dict[int, list] = {}
    fc_at: dict[int, list] = {}
    if hydrogen:
        for e in case.electrolyzers:
            elec_at.setdefault(e.bus, []).append(e)
        for f in case.fuel_cells:
            fc_at.setdefault(f.bus, []).append(f)
    out_at: dict[int, list] = {}
    in_at: dict[int, list] = {}
    for br in case.branches:
        out_at.setdefault(br.from_bus, []).append(br)
        in_at.setdefault(br.to_bus, []).append(br)

    for b in case.buses:
        n = b.id
        for t in range(T):
            terms: list[tuple[int, float]] = []
            rhs = case.demand_at(n, t)
            for g in gens_at.get(n, ()):
                terms.append((ix.p_var[g.id, t], 1.0))
            for w in wind_at.get(n, ()):
                # delivered wind = available - curtailed; the available
                # part is constant and moves to the right-hand side
                terms.append((ix.curtail_var[w.id, t], -1.0))
                rhs -= w.profile[t]
            for f in fc_at.get(n, ()):
                terms.append((ix.pf_var[f.id, t], 1.0))
            for e in elec_at.get(n, ()):
                terms.append((ix.pe_var[e.id, t], -1.0))
            for br in out_at.get(n, ()):
                terms.append((ix.flow_var[br.id, t], -1.0))
            for br in in_at.get(n, ()):
                terms.append((ix.flow_var[br.id, t], 1.0))
            if diagnostic:
                terms.append((ix.slack_pos_var[n, t], 1.0))
                terms.append((ix.slack_neg_var[n, t], -1.0))
            ix.nodal_row[n, t] = model.add_constraint(
                f"bal_n{n}_t{t + 1}", terms, "=", rhs
            )
            rows["nodal_balance"] += 1

    for g in case.generators:
        for t in range(T):
            if t == 0:
                model.add_constraint(
                    f"rup_g{g.id}_t1",
                    [(ix.p_var[g.id, 0], 1.0)],
                    "<=", g.ramp_hourly + g.initial_output,
                )
                model.add_constraint(
                    f"rdn_g{g.id}_t1",
                    [(ix.p_var[g.id, 0], -1.0)],
                    "<=", g.ramp_hourly - g.initial_output,
                )
            else:
                model.add_constraint(
                    f"rup_g{g.id}_t{t + 1}",
                    [(ix.p_var[g.id, t], 1.0), (ix.p_var[g.id, t - 1], -1.0)],
                    "<=", g.ramp_hourly,
                )
                model.add_constraint(
                    f"rdn_g{g.id}_t{t + 1}",
                    [(ix.p_var[g.id, t], -1.0), (ix.p_var[g.id, t - 1], 1.0)],
                    "<=", g.ramp_hourly,
                )
            rows["ramp_up"] += 1
            rows["ramp_down"] += 1

    for g in case.generators:
        for t in range(T):
            if t == 0:
                model.add_constraint(
                    f"vlink_g{g.id}_t1",
                    [(ix.v_var[g.id, 0], 1.0), (ix.u_var[g.id, 0], -1.0)],
                    ">=", -float(g.initial_on),
                )
            else:
                model.add_constraint(
                    f"vlink_g{g.id}_t{t + 1}",
                    [(ix.v_var[g.id, t], 1.0), (ix.u_var[g.id, t], -1.0),
                     (ix.u_var[g.id, t - 1], 1.0)],
                    ">=", 0.0,
                )
            rows["startup_link"] += 1

    if hydrogen and variant == Variant.HYDROGEN:
        for t in range(T):
            terms = [(ix.e_sys_var[t], 1.0)]
            if t > 0:
                terms.append((ix.e_sys_var[t - 1], -1.0))
            for e in case.electrolyzers:
                terms.append((ix.pe_var[e.id, t], -e.efficiency))
            for f in case.fuel_cells:
                terms.append((ix.pf_var[f.id, t], 1.0 / f.efficiency))
            rhs = case.hydrogen_e_initial if t == 0 else 0.0
            model.add_constraint(f"h2s_t{t + 1}", terms, "=", rhs)
            rows["h2_system_balance"] += 1
    elif hydrogen and variant == Variant.ENERGY_HUB:
        share = 1.0 / len(hubs) if hubs else 0.0
        for n in hubs:
            for t in range(T):
                terms = [(ix.e_node_var[n, t], 1.0)]
                if t > 0:
                    terms.append((ix.e_node_var[n, t - 1], -1.0))
                for e in elec_at.get(n, ()):
                    terms.append((ix.pe_var[e.id, t], -e.efficiency))
                for f in fc_at.get(n, ()):
                    terms.append((ix.pf_var[f.id, t], 1.0 / f.efficiency))
                rhs = case.hydrogen_e_initial * share if t == 0 else 0.0
                model.add_constraint(f"h2n_n{n}_t{t + 1}", terms, "=", rhs)
                rows["h2_hub_balance"] += 1

    manifest = BuildManifest(
        variant=variant,
        horizon=T,
        row_counts=rows,
        bound_counts=bounds,
        variables=model.num_variables(),
        binaries=len(model.binary_ids()),
        rows_total=model.num_constraints(),
        warnings=warnings,
    )
    return model, ix, manifest


def extract_schedule(
    case: GridCase,
    variant: str,
    index: VariableIndex,
    point: dict[int, float],
    tol: float = 1e-6,
) -> Schedule:
    """Turn a solver point into a physical schedule, verifying it.

    Independent cross-checks (never consulting the solver): commitment
    integrality, startup linkage, flows against angle differences,
    nodal power balance, curtailment within availability, and the
    hydrogen storage recursion.  Any breach beyond ``tol`` raises
    :class:`ScheduleError` naming the entity and period.
    """
    T = case.horizon
    hydrogen = _uses_hydrogen(variant)

    def val(vid: int) -> float:
        return point.get(vid, 0.0)

    u: dict[int, tuple[int, ...]] = {}
    v: dict[int, tuple[int, ...]] = {}
    p: dict[int, tuple[float, ...]] = {}
    reserve: dict[int, tuple[float, ...]] = {}
    for g in case.generators:
        uu, vv = [], []
        for t in range(T):
            for tag, store in (("u", uu), ("v", vv)):
                vid = (index.u_var if tag == "u" else index.v_var)[g.id, t]
                x = val(vid)
                if min(abs(x), abs(1.0 - x)) > tol:
                    raise ScheduleError(
                        f"unit {g.id} period {t + 1}: {tag}={x!r} is not integral"
                    )
                store.append(int(round(x)))
        u[g.id] = tuple(uu)
        v[g.id] = tuple(vv)
        p[g.id] = tuple(val(index.p_var[g.id, t]) for t in range(T))
        reserve[g.id] = tuple(val(index.r_var[g.id, t]) for t in range(T))
        prev = g.initial_on
        for t in range(T):
            if u[g.id][t] - prev > v[g.id][t]:
                raise ScheduleError(
                    f"unit {g.id} period {t + 1}: startup indicator missing"
                )
            prev = u[g.id][t]

    theta = {
        b.id: tuple(val(index.theta_var[b.id, t]) for t in range(T))
        for b in case.buses
    }
    flow: dict[int, tuple[float, ...]] = {}
    for br in case.branches:
        vals = tuple(val(index.flow_var[br.id, t]) for t in range(T))
        for t in range(T):
            implied = (theta[br.from_bus][t] - theta[br.to_bus][t]) / br.reactance_pu
            if abs(vals[t] - implied) > max(tol, 1e-9 * abs(vals[t])):
                raise ScheduleError(
                    f"branch {br.id} period {t + 1}: flow {vals[t]} "
                    f"does not match angle difference ({implied})"
                )
        flow[br.id] = vals

    wind_available = {w.id: tuple(w.profile) for w in case.wind_plants}
    curtail: dict[int, tuple[float, ...]] = {}
    for w in case.wind_plants:
        vals = tuple(val(index.curtail_var[w.id, t]) for t in range(T))
        for t in range(T):
            if vals[t] < -tol or vals[t] > w.profile[t] + tol:
                raise ScheduleError(
                    f"wind plant {w.id} period {t + 1}: curtailment {vals[t]} "
                    f"outside [0, {w.profile[t]}]"
                )
        curtail[w.id] = vals

    pe: dict[int, tuple[float, ...]] = {}
    pf: dict[int, tuple[float, ...]] = {}
    e_sys = None
    e_node = None
    if hydrogen:
        for e in case.electrolyzers:
            pe[e.id] = tuple(val(index.pe_var[e.id, t]) for t in range(T))
        for f in case.fuel_cells:
            pf[f.id] = tuple(val(index.pf_var[f.id, t]) for t in range(T))
        if variant == Variant.HYDROGEN:
            e_sys = tuple(val(index.e_sys_var[t]) for t in range(T))
            prev = case.hydrogen_e_initial
            for t in range(T):
                expected = (
                    prev
                    + sum(e.efficiency * pe[e.id][t] for e in case.electrolyzers)
                    - sum(pf[f.id][t] / f.efficiency for f in case.fuel_cells)
                )
                if abs(e_sys[t] - expected) > tol:
                    raise ScheduleError(
                        f"storage period {t + 1}: level {e_sys[t]} does not "
                        f"obey the balance recursion ({expected})"
                    )
                if e_sys[t] < -tol:
                    raise ScheduleError(f"storage period {t + 1}: negative level")
                prev = e_sys[t]
        else:
            hubs = case.hub_buses()
            share = 1.0 / len(hubs) if hubs else 0.0
            e_node = {}
            for n in hubs:
                levels = tuple(val(index.e_node_var[n, t]) for t in range(T))
                prev = case.hydrogen_e_initial * share
                for t in range(T):
                    expected = (
                        prev
                        + sum(e.efficiency * pe[e.id][t]
                              for e in case.electrolyzers if e.bus == n)
                        - sum(pf[f.id][t] / f.efficiency
                              for f in case.fuel_cells if f.bus == n)
                    )
                    if abs(levels[t] - expected) > tol:
                        raise ScheduleError(
                            f"hub {n} period {t + 1}: storage {levels[t]} does "
                            f"not obey the balance recursion ({expected})"
                        )
                    prev = levels[t]
                e_node[n] = levels

    slack_pos = slack_neg = None
    if index.slack_pos_var:
        slack_pos = {
            b.id: tuple(val(index.slack_pos_var[b.id, t]) for t in range(T))
            for b in case.buses
        }
        slack_neg = {
            b.id: tuple(val(index.slack_neg_var[b.id, t]) for t in range(T))
            for b in case.buses
        }

    # nodal balance residual from the physical quantities alone
    for b in case.buses:
        n = b.id
        for t in range(T):
            inj = sum(p[g.id][t] for g in case.generators if g.bus == n)
            inj += sum(w.profile[t] - curtail[w.id][t]
                       for w in case.wind_plants if w.bus == n)
            inj += sum(pf[f.id][t] for f in case.fuel_cells if f.bus == n) if hydrogen else 0.0
            inj -= sum(pe[e.id][t] for e in case.electrolyzers if e.bus == n) if hydrogen else 0.0
            if slack_pos is not None:
                inj += slack_pos[n][t] - slack_neg[n][t]
            net_flow = sum(flow[br.id][t] for br in case.branches if br.from_bus == n)
            net_flow -= sum(flow[br.id][t] for br in case.branches if br.to_bus == n)
            residual = inj - case.demand_at(n, t) - net_flow
            if abs(residual) > tol:
                raise ScheduleError(
                    f"bus {n} period {t + 1}: nodal balance residual {residual}"
                )

    total_cost = 0.0
    for g in case.generators:
        for t in range(T):
            total_cost += (
                g.cost_energy * p[g.id][t]
                + g.cost_no_load * u[g.id][t]
                + g.cost_startup * v[g.id][t]
            )

    return Schedule(
        variant=variant,
        horizon=T,
        total_cost=total_cost,
        u=u, v=v, p=p, reserve=reserve,
        theta=theta, flow=flow,
        wind_available=wind_available, curtail=curtail,
        pe=pe, pf=pf, e_sys=e_sys, e_node=e_node,
        slack_pos=slack_pos, slack_neg=slack_neg,
    )
