"""Command line front end.

Subcommands::

    hscuc validate CASE                 check a case file and report problems
    hscuc solve    CASE [options]       solve one or all variants
    hscuc sweep    CASE [options]       solve a grid of wind penetration levels
    hscuc siting   CASE [options]       compare fuel cell placements
    hscuc export   CASE -o FILE [...]   write the model in MPS format

Exit codes: 0 solved, 1 bad input, 2 proven infeasible or unbounded,
3 stopped at a node or time limit.  ``sweep`` and ``siting`` return the
worst code among their runs.

Options common to the solving commands can also come from a config file
(``--config``) of ``key = value`` lines using the long option names;
explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from hscuc import analysis
from hscuc.branch_bound import SolveOptions, fix_binaries_and_price, solve_milp
from hscuc.builder import build, extract_schedule
from hscuc.caseio import CaseFormatError, load_case, write_schedule
from hscuc.grid import (
    CaseValidationError,
    GridCase,
    Variant,
    scale_wind_to_penetration,
    validate_case,
    wind_penetration,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3

_OK_STATUSES = ("optimal", "gap_limit")
_LIMIT_STATUSES = ("feasible", "node_limit", "time_limit")

_SERIES_METRICS = (
    ("total_cost", "total_cost"),
    ("emissions", "emissions_tons"),
    ("curtailment", "curtailment_mwh"),
    ("avg_lmp", "avg_lmp"),
)


@dataclass
class RunSpec:
    """Everything one solver run needs; safe to ship to a worker process."""

    case_path: str
    variant: str
    penetration_pct: float | None = None
    gap: float = 1e-3
    time_limit: float | None = None
    node_limit: int = 1_000_000
    out_dir: str | None = None
    tag: str = ""
    diagnostic: bool = False
    fc_buses: tuple[int, ...] | None = None


@dataclass
class RunResult:
    variant: str
    tag: str
    status: str
    exit_code: int
    message: str = ""
    report: analysis.OperationalReport | None = None
    solve_seconds: float = 0.0


def _load_and_prepare(spec: RunSpec) -> GridCase:
    case = load_case(spec.case_path)
    if spec.fc_buses is not None:
        if len(spec.fc_buses) != len(case.fuel_cells):
            raise CaseValidationError(
                f"placement lists {len(spec.fc_buses)} buses for "
                f"{len(case.fuel_cells)} fuel cells"
            )
        moved = tuple(
            dataclasses.replace(fc, bus=b)
            for fc, b in zip(case.fuel_cells, spec.fc_buses)
        )
        case = dataclasses.replace(case, fuel_cells=moved)
        validate_case(case).raise_if_failed()
    if spec.penetration_pct is not None:
        case = scale_wind_to_penetration(case, spec.penetration_pct / 100.0)
    return case


def _out_base(spec: RunSpec) -> Path | None:
    if spec.out_dir is None:
        return None
    base = Path(spec.out_dir) / spec.variant
    if spec.tag:
        base = base / spec.tag
    return base


def _describe_diagnostic(case: GridCase, variant: str, opts: SolveOptions) -> str:
    """Re-solve with emergency slack injections to localize a shortfall."""
    model, index, _ = build(case, variant, diagnostic=True)
    sol = solve_milp(model, opts)
    if sol.status not in _OK_STATUSES + ("feasible",):
        return "diagnostic run did not find a relaxed solution"
    lines = []
    for (n, t), vid in sorted(index.slack_pos_var.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        v = sol.point.get(vid, 0.0)
        if v > 1e-6:
            lines.append(f"period {t + 1} bus {n}: {v:.3f} MW of generation missing")
    for (n, t), vid in sorted(index.slack_neg_var.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        v = sol.point.get(vid, 0.0)
        if v > 1e-6:
            lines.append(f"period {t + 1} bus {n}: {v:.3f} MW that cannot be absorbed")
    if not lines:
        return ("diagnostic run is feasible with zero slack; the conflict involves "
                "commitment logic rather than a nodal power shortfall")
    return "\n".join(lines)


def run_spec(spec: RunSpec) -> RunResult:
    """Solve one (variant, scenario) cell and write its artifacts."""
    try:
        case = _load_and_prepare(spec)
    except (CaseFormatError, CaseValidationError, OSError) as exc:
        return RunResult(spec.variant, spec.tag, "input_error", EXIT_INPUT, str(exc))

    t0 = time.monotonic()
    model, index, _ = build(case, spec.variant)
    opts = SolveOptions(
        gap_tol=spec.gap,
        time_limit_seconds=spec.time_limit,
        node_limit=spec.node_limit,
    )
    sol = solve_milp(model, opts)
    elapsed = time.monotonic() - t0

    if sol.status == "infeasible" or sol.status == "unbounded":
        message = f"model is {sol.status}"
        if sol.status == "infeasible" and spec.diagnostic:
            message += "\n" + _describe_diagnostic(case, spec.variant, opts)
        return RunResult(spec.variant, spec.tag, sol.status, EXIT_INFEASIBLE,
                         message, solve_seconds=elapsed)
    if sol.status in ("node_limit", "time_limit"):
        return RunResult(spec.variant, spec.tag, sol.status, EXIT_LIMIT,
                         "stopped before finding any feasible schedule",
                         solve_seconds=elapsed)

    pricing = fix_binaries_and_price(model, sol.point, opts)
    schedule = extract_schedule(case, spec.variant, index, sol.point)
    report = analysis.operational_report(
        case, spec.variant, schedule, pricing, index,
        penetration_pct=spec.penetration_pct,
        solver_status=sol.status, mip_gap=sol.gap, nodes=sol.nodes,
        solve_seconds=elapsed,
    )
    base = _out_base(spec)
    if base is not None:
        base.mkdir(parents=True, exist_ok=True)
        (base / "schedule.txt").write_text(write_schedule(schedule))
        (base / "report.txt").write_text(analysis.render_report(report))
    code = EXIT_OK if sol.status in _OK_STATUSES else EXIT_LIMIT
    return RunResult(spec.variant, spec.tag, sol.status, code,
                     report=report, solve_seconds=elapsed)


def _print_result(res: RunResult, stream=None) -> None:
    stream = stream or sys.stdout
    head = f"[{res.variant}{' ' + res.tag if res.tag else ''}]"
    if res.report is not None:
        r = res.report
        print(
            f"{head} {res.status}  cost={r.total_cost:,.1f}  "
            f"curtail={r.curtailment_mwh:,.1f} MWh  gap={r.mip_gap:.1e}  "
            f"nodes={r.nodes}  {res.solve_seconds:.1f}s",
            file=stream,
        )
    else:
        print(f"{head} {res.status}: {res.message}", file=stream)


def _run_many(specs: list[RunSpec], jobs: int) -> list[RunResult]:
    if jobs <= 1 or len(specs) <= 1:
        out = []
        for spec in specs:
            res = run_spec(spec)
            _print_result(res)
            out.append(res)
        return out
    results: list[RunResult | None] = [None] * len(specs)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for i, res in zip(range(len(specs)), pool.map(run_spec, specs)):
            _print_result(res)
            results[i] = res
    return results  # type: ignore[return-value]


def _check_cost_ordering(results: list[RunResult], label: str, gap: float) -> None:
    """Relaxation can never cost more, storage coupling never less, than
    the plain network-limited run; warn when solver tolerances are blown.
    """
    costs = {
        r.variant: r.report.total_cost for r in results if r.report is not None
    }
    if Variant.TRADITIONAL not in costs:
        return
    ct = costs[Variant.TRADITIONAL]
    tol = 2.0 * gap * max(1.0, abs(ct))
    checks = []
    if Variant.RELAXED in costs:
        checks.append((Variant.RELAXED, Variant.TRADITIONAL, costs[Variant.RELAXED], ct))
    if Variant.ENERGY_HUB in costs:
        checks.append((Variant.ENERGY_HUB, Variant.TRADITIONAL,
                       costs[Variant.ENERGY_HUB], ct))
    if Variant.HYDROGEN in costs and Variant.ENERGY_HUB in costs:
        checks.append((Variant.HYDROGEN, Variant.ENERGY_HUB,
                       costs[Variant.HYDROGEN], costs[Variant.ENERGY_HUB]))
    for lo_name, hi_name, lo_v, hi_v in checks:
        if lo_v > hi_v + tol:
            print(
                f"warning: {label}: {lo_name} cost {lo_v:,.1f} exceeds "
                f"{hi_name} cost {hi_v:,.1f} beyond tolerance {tol:.2g}",
                file=sys.stderr,
            )


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _parse_levels(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            out.append(float(tok))
    if not out:
        raise ValueError("empty level list")
    return out


def _parse_placements(text: str) -> list[tuple[int, ...]]:
    out = []
    for group in text.split(","):
        group = group.strip()
        if not group:
            continue
        out.append(tuple(int(tok) for tok in group.split(":")))
    if not out:
        raise ValueError("empty placement list")
    return out


def _parse_variants(text: str) -> list[str]:
    if text == "all":
        return list(Variant.ALL)
    return [Variant.check(tok.strip()) for tok in text.split(",") if tok.strip()]


def _load_config(path: str) -> dict[str, str]:
    conf = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CaseFormatError(line_no, "expected key = value", path)
        key, _, value = line.partition("=")
        conf[key.strip().replace("-", "_")] = value.strip()
    return conf


_CONFIG_KEYS = {
    "variant": str, "levels": str, "gap": float, "time_limit": float,
    "node_limit": int, "out": str, "jobs": int, "penetration": float,
    "placements": str,
}


def _merge_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    conf = _load_config(args.config)
    for key, cast in _CONFIG_KEYS.items():
        if key in conf and getattr(args, key, None) is None:
            setattr(args, key, cast(conf[key]))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hscuc",
        description="Day-ahead unit commitment with hydrogen storage variants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("case", help="path to the case file")
        p.add_argument("--config", help="key = value option file")
        p.add_argument("--gap", type=float, default=None,
                       help="relative optimality gap target (default 1e-3)")
        p.add_argument("--time-limit", type=float, default=None, dest="time_limit",
                       help="per-run wall clock limit in seconds")
        p.add_argument("--node-limit", type=int, default=None, dest="node_limit",
                       help="per-run node budget")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--diagnostic", action="store_true",
                       help="on infeasibility, localize the shortfall with "
                            "emergency slack injections")

    p_val = sub.add_parser("validate", help="parse and validate a case file")
    p_val.add_argument("case")

    p_solve = sub.add_parser("solve", help="solve one or all variants once")
    add_common(p_solve)
    p_solve.add_argument("--variant", default=None,
                         help="r-scuc, t-scuc, eh-scuc, h-scuc, a comma list, "
                              "or all (default t-scuc)")
    p_solve.add_argument("--penetration", type=float, default=None,
                         help="rescale wind to this percent of demand energy")
    p_solve.add_argument("--jobs", type=int, default=None,
                         help="parallel worker processes (default 1)")

    p_sweep = sub.add_parser("sweep", help="solve a wind penetration grid")
    add_common(p_sweep)
    p_sweep.add_argument("--variant", default=None,
                         help="comma list or all (default all)")
    p_sweep.add_argument("--levels", default=None,
                         help="comma list of penetration percents "
                              "(default 10,20,30,40,50)")
    p_sweep.add_argument("--jobs", type=int, default=None)

    p_site = sub.add_parser("siting", help="compare fuel cell placements")
    add_common(p_site)
    p_site.add_argument("--variant", default=None,
                        help="variant to study (default h-scuc)")
    p_site.add_argument("--levels", default=None,
                        help="penetration percents (default 10,20,30)")
    p_site.add_argument("--placements", default=None,
                        help="colon-joined bus groups, comma separated, one "
                             "bus per fuel cell (e.g. 13:15,4:5,9:10)")
    p_site.add_argument("--jobs", type=int, default=None)

    p_exp = sub.add_parser("export", help="write the model as an MPS file")
    p_exp.add_argument("case")
    p_exp.add_argument("-o", "--output", required=True, help="MPS path")
    p_exp.add_argument("--variant", default=Variant.TRADITIONAL)
    p_exp.add_argument("--penetration", type=float, default=None)

    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        text = Path(args.case).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    from hscuc.caseio import parse_case

    try:
        case = parse_case(text, base_dir=Path(args.case).parent)
    except CaseFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = validate_case(case)
    if not report.ok:
        for problem in report.problems:
            print(f"error: {problem.path}: {problem.message}", file=sys.stderr)
        return EXIT_INPUT
    pen = wind_penetration(case) * 100.0
    print(
        f"{case.name}: ok  ({len(case.buses)} buses, {len(case.branches)} branches, "
        f"{len(case.generators)} generators, {len(case.wind_plants)} wind plants, "
        f"{len(case.electrolyzers)} electrolyzers, {len(case.fuel_cells)} fuel cells, "
        f"horizon {case.horizon}, wind {pen:.1f}% of demand energy)"
    )
    return EXIT_OK


def _fill_solver_defaults(args: argparse.Namespace) -> None:
    if args.gap is None:
        args.gap = 1e-3
    if args.node_limit is None:
        args.node_limit = 1_000_000
    if getattr(args, "jobs", None) is None:
        args.jobs = 1


def _default_out(args: argparse.Namespace) -> str:
    if args.out is not None:
        return args.out
    return str(Path("runs") / Path(args.case).stem)


def _cmd_solve(args: argparse.Namespace) -> int:
    _merge_config(args)
    _fill_solver_defaults(args)
    variants = _parse_variants(args.variant or Variant.TRADITIONAL)
    out = _default_out(args)
    specs = [
        RunSpec(
            case_path=args.case, variant=v, penetration_pct=args.penetration,
            gap=args.gap, time_limit=args.time_limit, node_limit=args.node_limit,
            out_dir=out, diagnostic=args.diagnostic,
        )
        for v in variants
    ]
    results = _run_many(specs, args.jobs)
    reports = [r.report for r in results if r.report is not None]
    if len(reports) > 1:
        table = analysis.comparison_table(reports)
        tables_dir = Path(out) / "tables"
        tables_dir.mkdir(parents=True, exist_ok=True)
        (tables_dir / "summary.txt").write_text(table)
        print()
        print(table, end="")
        _check_cost_ordering(results, "solve", args.gap)
    for res in results:
        if res.exit_code != EXIT_OK and res.message:
            print(f"error: [{res.variant}] {res.message}", file=sys.stderr)
    return max((r.exit_code for r in results), default=EXIT_OK)


def _write_series(
    out: Path, levels: list[float], variants: list[str],
    by_cell: dict[tuple[str, float], RunResult],
) -> None:
    series_dir = out / "series"
    series_dir.mkdir(parents=True, exist_ok=True)
    for fname, attr in _SERIES_METRICS:
        lines = ["level\t" + "\t".join(variants)]
        for level in levels:
            row = [f"{level:g}"]
            for v in variants:
                res = by_cell.get((v, level))
                if res is not None and res.report is not None:
                    row.append(f"{analysis.metric_value(res.report, attr):.6g}")
                else:
                    row.append("nan")
            lines.append("\t".join(row))
        (series_dir / f"{fname}.tsv").write_text("\n".join(lines) + "\n")


def _cmd_sweep(args: argparse.Namespace) -> int:
    _merge_config(args)
    _fill_solver_defaults(args)
    variants = _parse_variants(args.variant or "all")
    levels = _parse_levels(args.levels or "10,20,30,40,50")
    out = Path(_default_out(args))
    specs = []
    for level in levels:
        for v in variants:
            specs.append(RunSpec(
                case_path=args.case, variant=v, penetration_pct=level,
                gap=args.gap, time_limit=args.time_limit,
                node_limit=args.node_limit, out_dir=str(out),
                tag=f"p{level:g}", diagnostic=args.diagnostic,
            ))
    results = _run_many(specs, args.jobs)
    by_cell = {
        (res.variant, spec.penetration_pct): res
        for spec, res in zip(specs, results)
    }
    tables_dir = out / "tables"
    tables_dir.mkdir(parents=True, exist_ok=True)
    for level in levels:
        level_results = [by_cell[v, level] for v in variants if (v, level) in by_cell]
        reports = [r.report for r in level_results if r.report is not None]
        if reports:
            table = analysis.comparison_table(reports)
            (tables_dir / f"level_{level:g}.txt").write_text(table)
        _check_cost_ordering(level_results, f"level {level:g}%", args.gap)
    _write_series(out, levels, variants, by_cell)
    for res in results:
        if res.exit_code != EXIT_OK and res.message:
            print(f"error: [{res.variant} {res.tag}] {res.message}", file=sys.stderr)
    return max((r.exit_code for r in results), default=EXIT_OK)


def _cmd_siting(args: argparse.Namespace) -> int:
    _merge_config(args)
    _fill_solver_defaults(args)
    variant = Variant.check(args.variant or Variant.HYDROGEN)
    levels = _parse_levels(args.levels or "10,20,30")
    placements = _parse_placements(args.placements or "13:15,4:5,9:10")
    out = Path(_default_out(args)) / "siting"
    specs, labels = [], []
    for buses in placements:
        label = "-".join(str(b) for b in buses)
        for level in levels:
            specs.append(RunSpec(
                case_path=args.case, variant=variant, penetration_pct=level,
                gap=args.gap, time_limit=args.time_limit,
                node_limit=args.node_limit, out_dir=str(out / label),
                tag=f"p{level:g}", diagnostic=args.diagnostic,
                fc_buses=buses,
            ))
            labels.append(label)
    results = _run_many(specs, args.jobs)
    by_cell = dict(zip(((lbl, spec.penetration_pct) for lbl, spec in zip(labels, specs)),
                       results))
    lines = []
    width = max(len("placement"), max(len(lbl) for lbl, _ in by_cell))
    for title, attr in (("curtailment (MWh)", "curtailment_mwh"),
                        ("total cost ($)", "total_cost")):
        lines.append(title)
        header = f"{'placement':<{width}s}" + "".join(
            f"{f'{lv:g}%':>16s}" for lv in levels
        )
        lines.append(header)
        lines.append("-" * len(header))
        for buses in placements:
            lbl = "-".join(str(b) for b in buses)
            row = f"{lbl:<{width}s}"
            for level in levels:
                res = by_cell.get((lbl, level))
                if res is not None and res.report is not None:
                    row += f"{analysis.metric_value(res.report, attr):>16,.1f}"
                else:
                    row += f"{'n/a':>16s}"
            lines.append(row)
        lines.append("")
    summary = "\n".join(lines)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.txt").write_text(summary)
    print()
    print(summary, end="")
    for res in results:
        if res.exit_code != EXIT_OK and res.message:
            print(f"error: [{res.variant} {res.tag}] {res.message}", file=sys.stderr)
    return max((r.exit_code for r in results), default=EXIT_OK)


def _cmd_export(args: argparse.Namespace) -> int:
    try:
        case = load_case(args.case)
        if args.penetration is not None:
            case = scale_wind_to_penetration(case, args.penetration / 100.0)
        variant = Variant.check(args.variant)
    except (CaseFormatError, CaseValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    from hscuc.milp import export_mps

    model, _, _ = build(case, variant)
    Path(args.output).write_text(export_mps(model))
    print(f"wrote {args.output}: {len(model.variables)} columns, "
          f"{len(model.constraints)} rows")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "siting":
            return _cmd_siting(args)
        if args.command == "export":
            return _cmd_export(args)
    except (CaseFormatError, CaseValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
