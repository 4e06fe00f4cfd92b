"""Command-line front end: ``torpedo-smc run|compare|sweep|list``."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import export
from .metrics import format_value, metrics_report
from .scenario import (
    ScenarioError,
    get_path,
    load_scenario_dict,
    packaged_scenarios,
    parse_override,
    scenario_from_dict,
    set_path,
)
from .sim import DivergenceError, GridMismatchError, check_shared_grid, run_closed_loop, run_comparison

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4
EXIT_GRID = 5

OUTDIR_ENV = "TORPEDO_SMC_OUTDIR"

EPILOG = f"""\
exit codes:
  {EXIT_OK}  success
  {EXIT_PARSE}  scenario parse or schema error (including unknown sweep parameter)
  {EXIT_DIVERGENCE}  simulation diverged (non-finite state)
  {EXIT_IO}  file could not be read or written
  {EXIT_GRID}  compared scenarios do not share dt, duration and reference

Scenarios are YAML files or names of packaged scenarios (see `list`).
Outputs without an explicit path go to ${OUTDIR_ENV} (default: current directory).
"""


def _outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV) or ".")


def _load(path: str, overrides):
    return scenario_from_dict(load_scenario_dict(path, overrides))


def _write_text(path, text: str) -> None:
    Path(path).write_text(text)


def _print_report(rows, fmt: str) -> None:
    print(export.metrics_json(rows) if fmt == "json" else export.metrics_table_text(rows))


def cmd_run(args) -> int:
    sc = _load(args.scenario, args.set)
    log = run_closed_loop(sc)
    csv_path = args.csv or sc.output.csv or str(_outdir() / f"{sc.name}.csv")
    export.log_csv(csv_path, log)
    svg_path = args.svg or sc.output.svg
    if svg_path:
        _write_text(svg_path, export.run_svg(log))
    _print_report([(sc.name, metrics_report(log))], args.report or sc.output.report)
    return EXIT_OK


def cmd_compare(args) -> int:
    scenarios = [_load(p, args.set) for p in args.scenarios]
    check_shared_grid(scenarios)
    report = run_comparison(scenarios)
    if len(scenarios) == 1:
        csv_path = args.csv or str(_outdir() / f"{report.labels[0]}.csv")
        export.log_csv(csv_path, report.logs[0])
    else:
        csv_path = args.csv or str(_outdir() / "comparison.csv")
        cols, mat = export.comparison_matrix(report.logs, report.labels)
        export.write_csv(csv_path, cols, mat)
    metrics_path = args.metrics or str(Path(csv_path).with_suffix("")) + "_metrics.json"
    _write_text(metrics_path, export.metrics_json(report.rows()) + "\n")
    if args.svg:
        for signal in ("y", "u", "s"):
            _write_text(f"{args.svg}_{signal}.svg", export.overlay_svg(report.logs, report.labels, signal))
    _print_report(report.rows(), args.report)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.values:
        raise ScenarioError("sweep needs at least one value")
    base = load_scenario_dict(args.scenario, args.set)
    current = get_path(scenario_from_dict(base).model_dump(mode="json"), args.parameter)
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise ScenarioError(f"{args.parameter} is not a numeric field")
    rows = []
    for raw in args.values:
        value = parse_yaml_scalar(raw)
        sc = scenario_from_dict(set_path(base, args.parameter, value))
        rows.append((value, metrics_report(run_closed_loop(sc))))
    name = base.get("name", "scenario")
    csv_path = args.csv or str(_outdir() / f"{name}_sweep_{args.parameter.replace('.', '_')}.csv")
    fields = list(rows[0][1].to_dict())
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([args.parameter] + fields)
        for value, m in rows:
            w.writerow([value] + ["" if v is None else v for v in m.to_dict().values()])
    if args.report == "json":
        print(export.metrics_json([(f"{args.parameter}={v}", m) for v, m in rows]))
    else:
        print(export.metrics_table_text([(f"{args.parameter}={format_value(v)}", m) for v, m in rows]))
    return EXIT_OK


def parse_yaml_scalar(raw: str):
    value = parse_override(f"v={raw}")[1]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"sweep value {raw!r} is not a number")
    return value


def cmd_list(args) -> int:
    for name in packaged_scenarios():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torpedo-smc",
        description="Closed-loop torpedo depth/inclination simulations (PID, SMC1, SMC2, observer).",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--csv", metavar="PATH", help="CSV output path")
        p.add_argument("--report", choices=("text", "json"), help="metrics report format on stdout")
        p.add_argument(
            "--set", action="append", default=[], metavar="KEY=VALUE",
            help="override a scenario field by dotted path, e.g. controller.k=0.02 or smc1.k=0.02",
        )

    p = sub.add_parser("run", help="simulate one scenario", epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("scenario")
    common(p)
    p.add_argument("--svg", metavar="PATH", help="write y/u/s (and velocity) plot")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run scenarios on a shared grid and tabulate metrics", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("scenarios", nargs="+")
    common(p)
    p.add_argument("--svg", metavar="PREFIX", help="write PREFIX_y.svg, PREFIX_u.svg, PREFIX_s.svg overlays")
    p.add_argument("--metrics", metavar="PATH", help="metrics JSON path (default: next to the CSV)")
    p.set_defaults(func=cmd_compare, report="text")

    p = sub.add_parser("sweep", help="one metrics row per value of a numeric parameter", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("scenario")
    p.add_argument("parameter", help="dotted path, e.g. smc1.k or dt")
    p.add_argument("values", nargs="*")
    common(p)
    p.set_defaults(func=cmd_sweep, report="text")

    p = sub.add_parser("list", help="list packaged scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except GridMismatchError as err:
        print(f"error: grid mismatch: {err}", file=sys.stderr)
        return EXIT_GRID
    except DivergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except ValueError as err:
        print(f"error: invalid scenario: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
