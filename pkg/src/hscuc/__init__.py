"""Day-ahead unit commitment toolkit with hydrogen transport variants.

The package is organized in layers:

* :mod:`hscuc.milp` -- solver-agnostic MILP container, evaluation, MPS I/O
* :mod:`hscuc.simplex` -- bounded-variable revised simplex over the container
* :mod:`hscuc.propagate` -- activity-based bound propagation on the rows
* :mod:`hscuc.cuts` -- Gomory mixed-integer cut separation
* :mod:`hscuc.branch_bound` -- branch and bound on binary variables
* :mod:`hscuc.grid` -- power system data model and validation
* :mod:`hscuc.caseio` -- text formats for cases, profiles, schedules
* :mod:`hscuc.builder` -- commitment model construction for each variant
* :mod:`hscuc.analysis` -- prices, congestion, emissions, comparison tables
* :mod:`hscuc.cli` -- command line front end
"""

from hscuc.analysis import (
    OperationalReport,
    anclph,
    average_lmp,
    comparison_table,
    compute_lmp,
    congested_lines,
    congestion_cost,
    emissions_tons,
    load_payment,
    nclph_at_peak,
    operational_report,
    render_report,
)
from hscuc.branch_bound import (
    MilpSolution,
    SolveOptions,
    fix_binaries_and_price,
    solve_milp,
)
from hscuc.builder import (
    BuildManifest,
    Schedule,
    VariableIndex,
    build,
    extract_schedule,
)
from hscuc.caseio import (
    CaseFormatError,
    load_case,
    parse_case,
    parse_profiles,
    read_schedule,
    serialize_case,
    serialize_profiles,
    write_schedule,
)
from hscuc.grid import (
    Branch,
    Bus,
    Electrolyzer,
    FuelCell,
    Generator,
    GridCase,
    Variant,
    WindPlant,
    scale_wind_to_penetration,
    validate_case,
    wind_penetration,
)
from hscuc.milp import LinearConstraint, MilpModel, Variable, evaluate

__all__ = [
    "Branch",
    "BuildManifest",
    "Bus",
    "CaseFormatError",
    "Electrolyzer",
    "FuelCell",
    "Generator",
    "GridCase",
    "LinearConstraint",
    "MilpModel",
    "MilpSolution",
    "OperationalReport",
    "Schedule",
    "SolveOptions",
    "Variable",
    "VariableIndex",
    "Variant",
    "WindPlant",
    "anclph",
    "average_lmp",
    "build",
    "comparison_table",
    "compute_lmp",
    "congested_lines",
    "congestion_cost",
    "emissions_tons",
    "evaluate",
    "extract_schedule",
    "fix_binaries_and_price",
    "load_case",
    "load_payment",
    "nclph_at_peak",
    "operational_report",
    "parse_case",
    "parse_profiles",
    "read_schedule",
    "render_report",
    "scale_wind_to_penetration",
    "serialize_case",
    "serialize_profiles",
    "solve_milp",
    "validate_case",
    "wind_penetration",
    "write_schedule",
]

__version__ = "0.1.0"
