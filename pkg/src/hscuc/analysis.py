"""Post-solve economics: prices, payments, congestion, emissions.

Everything here is derived from a cross-checked :class:`Schedule` plus
the dual solution of the commitment-fixed pricing run.  Locational
prices are the duals of the nodal balance rows; congestion rent is the
merchandising surplus of the market (payments by consumption minus
revenue to injection), which is zero whenever prices are uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

from hscuc.builder import Schedule, VariableIndex
from hscuc.grid import GridCase
from hscuc.simplex import LpSolution

# Relative slack under a line's rating at which it counts as loaded to
# the limit.  Unbounded-network runs can exceed 1.0; those count too.
CONGESTION_TOL = 1e-4


def compute_lmp(
    case: GridCase, index: VariableIndex, pricing: LpSolution
) -> dict[int, tuple[float, ...]]:
    """Per-bus hourly prices from the nodal balance duals, $/MWh."""
    if pricing.duals is None:
        raise ValueError("pricing solution carries no duals")
    out: dict[int, tuple[float, ...]] = {}
    for bus in case.buses:
        out[bus.id] = tuple(
            pricing.duals[index.nodal_row[bus.id, t]] for t in range(case.horizon)
        )
    return out


def load_payment(case: GridCase, lmp: dict[int, tuple[float, ...]]) -> float:
    """Total consumer payment Σ demand × price over buses and periods."""
    total = 0.0
    for bus_id, profile in case.demand.items():
        prices = lmp[bus_id]
        total += sum(d * y for d, y in zip(profile, prices))
    return total


def average_lmp(case: GridCase, lmp: dict[int, tuple[float, ...]]) -> float:
    """Demand-weighted average price; simple average if demand sums to zero."""
    energy = sum(sum(profile) for profile in case.demand.values())
    if energy > 0:
        return load_payment(case, lmp) / energy
    prices = [y for series in lmp.values() for y in series]
    return sum(prices) / len(prices) if prices else 0.0


def congested_lines(
    case: GridCase, schedule: Schedule, tol: float = CONGESTION_TOL
) -> dict[int, tuple[int, ...]]:
    """Branches loaded to (or past) their rating, per period."""
    out: dict[int, tuple[int, ...]] = {}
    caps = {br.id: br.capacity_mw for br in case.branches}
    for t in range(schedule.horizon):
        hit = [
            k
            for k, series in sorted(schedule.flow.items())
            if abs(series[t]) >= caps[k] * (1.0 - tol)
        ]
        out[t] = tuple(hit)
    return out


def anclph(case: GridCase, schedule: Schedule) -> float:
    """Average number of congested lines per hour across the horizon."""
    per_period = congested_lines(case, schedule)
    return sum(len(v) for v in per_period.values()) / schedule.horizon


def peak_period(case: GridCase) -> int:
    """0-based period of highest total demand, earliest on ties."""
    totals = [case.total_demand(t) for t in range(case.horizon)]
    return max(range(case.horizon), key=lambda t: (totals[t], -t))


def nclph_at_peak(case: GridCase, schedule: Schedule) -> int:
    """Number of congested lines in the peak-demand period."""
    return len(congested_lines(case, schedule)[peak_period(case)])


def congestion_cost(
    case: GridCase, schedule: Schedule, lmp: dict[int, tuple[float, ...]]
) -> float:
    """Merchandising surplus: payments by withdrawals minus revenue to
    injections, priced nodally.

    Wind output (available minus curtailed), fuel cell discharge, and
    any diagnostic slack generation count as injections; demand and
    electrolyzer charging count as withdrawals.  Uniform prices make
    this identically zero because the system balances each period.
    """
    inj: dict[tuple[int, int], float] = {}

    def add(bus: int, series_by_id: dict[int, tuple[float, ...]], ids: dict[int, int],
            sign: float) -> None:
        for ent_id, at_bus in ids.items():
            if at_bus != bus:
                continue
            for t, v in enumerate(series_by_id[ent_id]):
                inj[bus, t] = inj.get((bus, t), 0.0) + sign * v

    gen_bus = {g.id: g.bus for g in case.generators}
    wind_bus = {w.id: w.bus for w in case.wind_plants}
    e_bus = {e.id: e.bus for e in case.electrolyzers}
    f_bus = {f.id: f.bus for f in case.fuel_cells}
    for bus in case.buses:
        n = bus.id
        add(n, schedule.p, gen_bus, +1.0)
        add(n, schedule.wind_available, wind_bus, +1.0)
        add(n, schedule.curtail, wind_bus, -1.0)
        if schedule.pf:
            add(n, schedule.pf, f_bus, +1.0)
        if schedule.pe:
            add(n, schedule.pe, e_bus, -1.0)
        if schedule.slack_pos:
            add(n, schedule.slack_pos, {k: k for k in schedule.slack_pos}, +1.0)
        if schedule.slack_neg:
            add(n, schedule.slack_neg, {k: k for k in schedule.slack_neg}, -1.0)
    surplus = 0.0
    for bus in case.buses:
        n = bus.id
        prices = lmp[n]
        demand = case.demand.get(n, (0.0,) * case.horizon)
        for t in range(case.horizon):
            withdrawal = demand[t] - inj.get((n, t), 0.0)
            surplus += prices[t] * withdrawal
    return surplus


def emissions_tons(case: GridCase, schedule: Schedule) -> float:
    """CO2 mass over the horizon, metric tons (rates are kg per MWh)."""
    kg = 0.0
    for g in case.generators:
        kg += g.co2_rate * sum(schedule.p[g.id])
    return kg / 1000.0


@dataclass
class OperationalReport:
    """One solved run condensed to the headline operating metrics."""

    variant: str
    case_name: str
    total_cost: float
    emissions_tons: float
    curtailment_mwh: float
    avg_lmp: float
    load_payment: float
    congestion_cost: float
    anclph: float
    nclph_peak: int
    peak_period: int
    penetration_pct: float | None = None
    solver_status: str = ""
    mip_gap: float = 0.0
    nodes: int = 0
    solve_seconds: float | None = None


# Table row label -> report attribute, in presentation order.
REPORT_METRICS: tuple[tuple[str, str], ...] = (
    ("total cost ($)", "total_cost"),
    ("emissions (t CO2)", "emissions_tons"),
    ("curtailment (MWh)", "curtailment_mwh"),
    ("avg LMP ($/MWh)", "avg_lmp"),
    ("load payment ($)", "load_payment"),
    ("congestion cost ($)", "congestion_cost"),
    ("congested lines/h", "anclph"),
    ("congested at peak", "nclph_peak"),
)


def operational_report(
    case: GridCase,
    variant: str,
    schedule: Schedule,
    pricing: LpSolution,
    index: VariableIndex,
    penetration_pct: float | None = None,
    solver_status: str = "",
    mip_gap: float = 0.0,
    nodes: int = 0,
    solve_seconds: float | None = None,
) -> OperationalReport:
    """Assemble the full metric set for one solved variant."""
    lmp = compute_lmp(case, index, pricing)
    return OperationalReport(
        variant=variant,
        case_name=case.name,
        total_cost=schedule.total_cost,
        emissions_tons=emissions_tons(case, schedule),
        curtailment_mwh=schedule.curtailment_total(),
        avg_lmp=average_lmp(case, lmp),
        load_payment=load_payment(case, lmp),
        congestion_cost=congestion_cost(case, schedule, lmp),
        anclph=anclph(case, schedule),
        nclph_peak=nclph_at_peak(case, schedule),
        peak_period=peak_period(case),
        penetration_pct=penetration_pct,
        solver_status=solver_status,
        mip_gap=mip_gap,
        nodes=nodes,
        solve_seconds=solve_seconds,
    )


def render_report(report: OperationalReport) -> str:
    """Key = value rendering, one metric per line."""
    lines = [
        f"case = {report.case_name}",
        f"variant = {report.variant}",
    ]
    if report.penetration_pct is not None:
        lines.append(f"wind_penetration_pct = {report.penetration_pct:g}")
    lines += [
        f"status = {report.solver_status}",
        f"total_cost = {report.total_cost:.2f}",
        f"emissions_tons = {report.emissions_tons:.3f}",
        f"curtailment_mwh = {report.curtailment_mwh:.3f}",
        f"avg_lmp = {report.avg_lmp:.4f}",
        f"load_payment = {report.load_payment:.2f}",
        f"congestion_cost = {report.congestion_cost:.2f}",
        f"anclph = {report.anclph:.4f}",
        f"nclph_peak = {report.nclph_peak}",
        f"peak_period = {report.peak_period + 1}",
        f"mip_gap = {report.mip_gap:.3e}",
        f"nodes = {report.nodes}",
    ]
    if report.solve_seconds is not None:
        lines.append(f"solve_seconds = {report.solve_seconds:.2f}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or "=" not in line:
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def comparison_table(
    reports: list[OperationalReport], baseline_variant: str = "t-scuc"
) -> str:
    """Side-by-side metric table, each cell also shown relative to the
    network-limited baseline (100%).  A dash marks ratios against a
    zero baseline.
    """
    base = next((r for r in reports if r.variant == baseline_variant), None)
    header = f"{'metric':<22s}"
    for r in reports:
        header += f"{r.variant.upper():>24s}"
    lines = [header, "-" * len(header)]
    for label, attr in REPORT_METRICS:
        row = f"{label:<22s}"
        base_v = getattr(base, attr) if base is not None else None
        for r in reports:
            v = float(getattr(r, attr))
            cell = f"{v:,.1f}"
            if base_v is not None:
                if abs(float(base_v)) > 1e-12:
                    cell += f" ({100.0 * v / float(base_v):.1f}%)"
                else:
                    cell += " (—)" if abs(v) > 1e-12 else " (100.0%)"
            row += f"{cell:>24s}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def metric_value(report: OperationalReport, attr: str) -> float:
    """Numeric accessor used by table and series writers."""
    return float(getattr(report, attr))
