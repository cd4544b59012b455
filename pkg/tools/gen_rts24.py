"""Regenerate the bundled 24-bus day-ahead case.

Topology and reactances follow the single-area 24-bus reliability test
system; ratings on the wind export corridors are tightened so that
network effects show up at the studied penetration levels.  Loads,
costs, and the wind shapes are calibrated for a 24 hour horizon at a
2550 MW peak.  Run from the repository root:

    python3 tools/gen_rts24.py
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hscuc.caseio import serialize_case
from hscuc.grid import (
    Branch,
    Bus,
    Electrolyzer,
    FuelCell,
    Generator,
    GridCase,
    WindPlant,
    validate_case,
    wind_penetration,
)

PEAK_MW = 2550.0

HOURLY = (
    0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96, 0.95,
    0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83, 0.73, 0.63,
)

BUS_SHARE = {
    1: 0.038, 2: 0.034, 3: 0.063, 4: 0.026, 5: 0.025, 6: 0.048, 7: 0.044,
    8: 0.060, 9: 0.061, 10: 0.068, 13: 0.093, 14: 0.068, 15: 0.111,
    16: 0.035, 18: 0.117, 19: 0.064, 20: 0.045,
}

# id, from, to, x (pu on 100 MVA), rating (MW)
BRANCHES = (
    (1, 1, 2, 0.0139, 175.0),
    (2, 1, 3, 0.2112, 175.0),
    (3, 1, 5, 0.0845, 175.0),
    (4, 2, 4, 0.1267, 175.0),
    (5, 2, 6, 0.1920, 175.0),
    (6, 3, 9, 0.1190, 175.0),
    (7, 3, 24, 0.0839, 400.0),
    (8, 4, 9, 0.1037, 175.0),
    (9, 5, 10, 0.0883, 175.0),
    (10, 6, 10, 0.0605, 175.0),
    (11, 7, 8, 0.0614, 175.0),
    (12, 8, 9, 0.1651, 175.0),
    (13, 8, 10, 0.1651, 175.0),
    (14, 9, 11, 0.0839, 400.0),
    (15, 9, 12, 0.0839, 400.0),
    (16, 10, 11, 0.0839, 400.0),
    (17, 10, 12, 0.0839, 400.0),
    (18, 11, 13, 0.0476, 400.0),
    (19, 11, 14, 0.0418, 250.0),
    (20, 12, 13, 0.0476, 400.0),
    (21, 12, 23, 0.0966, 400.0),
    (22, 13, 23, 0.0865, 400.0),
    (23, 14, 16, 0.0389, 250.0),
    (24, 15, 16, 0.0173, 350.0),
    (25, 15, 21, 0.0490, 400.0),
    (26, 15, 21, 0.0490, 400.0),
    (27, 15, 24, 0.0519, 350.0),
    (28, 16, 17, 0.0259, 400.0),
    (29, 16, 19, 0.0231, 350.0),
    (30, 17, 18, 0.0144, 400.0),
    (31, 17, 22, 0.1053, 240.0),
    (32, 18, 21, 0.0259, 400.0),
    (33, 18, 21, 0.0259, 400.0),
    (34, 19, 20, 0.0396, 350.0),
    (35, 19, 20, 0.0396, 350.0),
    (36, 20, 23, 0.0216, 400.0),
    (37, 20, 23, 0.0216, 400.0),
    (38, 21, 22, 0.0678, 240.0),
)

# id, bus, pmin, pmax, ramp/h, ramp/10min, c_E, c_NL, c_SU, co2, u0, p0
GENERATORS = (
    (1, 1, 8.0, 80.0, 80.0, 80.0, 52.0, 30.0, 150.0, 1610.0, 0, 0.0),
    (2, 1, 30.4, 152.0, 90.0, 45.0, 13.6, 210.0, 1600.0, 2280.0, 1, 60.0),
    (3, 2, 8.0, 80.0, 80.0, 80.0, 53.5, 30.0, 150.0, 1610.0, 0, 0.0),
    (4, 2, 30.4, 152.0, 90.0, 45.0, 13.9, 210.0, 1600.0, 2280.0, 1, 60.0),
    (5, 7, 75.0, 300.0, 180.0, 90.0, 22.0, 260.0, 1100.0, 1650.0, 0, 0.0),
    (6, 13, 118.2, 591.0, 280.0, 140.0, 20.2, 380.0, 1800.0, 1660.0, 1, 150.0),
    (7, 15, 12.0, 60.0, 60.0, 30.0, 27.0, 60.0, 150.0, 1700.0, 0, 0.0),
    (8, 15, 54.25, 155.0, 90.0, 45.0, 12.1, 200.0, 1500.0, 2240.0, 1, 100.0),
    (9, 16, 54.25, 155.0, 90.0, 45.0, 11.9, 200.0, 1500.0, 2240.0, 1, 100.0),
    (10, 18, 160.0, 400.0, 90.0, 45.0, 7.6, 300.0, 4000.0, 0.0, 1, 350.0),
    (11, 21, 160.0, 400.0, 90.0, 45.0, 7.4, 300.0, 4000.0, 0.0, 1, 350.0),
    (12, 23, 108.5, 310.0, 140.0, 70.0, 12.7, 240.0, 2600.0, 2250.0, 1, 150.0),
    (13, 23, 140.0, 350.0, 150.0, 75.0, 11.6, 260.0, 2800.0, 2090.0, 1, 200.0),
)


def wind_profile(base: float, mean: float, amp1: float, lag1: float,
                 amp2: float, lag2: float) -> tuple[float, ...]:
    out = []
    for t in range(1, 25):
        cf = (mean
              + amp1 * math.cos(2.0 * math.pi * (t - lag1) / 24.0)
              + amp2 * math.sin(4.0 * math.pi * (t - lag2) / 24.0))
        out.append(base * cf)
    return tuple(out)


def build_case() -> GridCase:
    buses = tuple(
        Bus(id=n, base_kv=138.0 if n <= 10 else 230.0, is_slack=(n == 13))
        for n in range(1, 25)
    )
    branches = tuple(Branch(*row) for row in BRANCHES)
    generators = tuple(Generator(*row) for row in GENERATORS)
    demand = {
        n: tuple(PEAK_MW * share * h for h in HOURLY)
        for n, share in BUS_SHARE.items()
    }
    wind = (
        WindPlant(1, 14, wind_profile(420.0, 0.42, 0.30, 1.0, 0.05, 3.0)),
        WindPlant(2, 22, wind_profile(580.0, 0.45, 0.33, 2.0, 0.04, 5.0)),
    )
    electrolyzers = (
        Electrolyzer(1, 14, 300.0, 0.8),
        Electrolyzer(2, 22, 300.0, 0.8),
    )
    fuel_cells = (
        FuelCell(1, 13, 200.0, 0.6),
        FuelCell(2, 15, 200.0, 0.6),
    )
    return GridCase(
        name="rts24-h2",
        mva_base=100.0,
        horizon=24,
        buses=buses,
        branches=branches,
        generators=generators,
        demand=demand,
        wind_plants=wind,
        electrolyzers=electrolyzers,
        fuel_cells=fuel_cells,
        hydrogen_e_initial=0.0,
        hydrogen_e_max=None,
    )


def main() -> None:
    case = build_case()
    validate_case(case).raise_if_failed()
    files = serialize_case(case, demand_file="rts24_demand.tsv",
                           wind_file="rts24_wind.tsv")
    out = Path(__file__).resolve().parents[1] / "src" / "hscuc" / "data"
    files.write_to(out, "rts24.case")
    print(f"wrote {out / 'rts24.case'}")
    print(f"peak demand {max(sum(p) for p in zip(*case.demand.values())):.1f} MW, "
          f"installed thermal {sum(g.p_max for g in case.generators):.0f} MW, "
          f"wind {wind_penetration(case) * 100:.1f}% of demand energy")


if __name__ == "__main__":
    main()
