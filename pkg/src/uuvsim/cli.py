"""Command-line front end: run, compare and validate scenarios.

Exit codes: 0 success, 2 scenario/validation failure, 3 runtime guard
error. Log verbosity comes from the UUVSIM_LOG_LEVEL environment
variable (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from . import engine, metrics
from .controllers import Variant, check_stability_conditions
from .errors import ScenarioError, SimAbort
from .graph import validate_topology
from .scenario import Scenario, load_scenario

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_RUNTIME = 3

log = logging.getLogger("uuvsim")


def _configure_logging():
    level = os.environ.get("UUVSIM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uuvsim",
        description="Distributed constrained formation tracking of an "
                    "underactuated underwater vehicle fleet.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one controller variant")
    run_p.add_argument("--scenario", required=True, help="scenario TOML path")
    run_p.add_argument("--controller", default=None,
                       help="override the scenario's controller variant")
    run_p.add_argument("--out", default=None, help="CSV log output path")
    run_p.add_argument("--tfinal", type=float, default=None,
                       help="override horizon (s)")
    run_p.add_argument("--dt", type=float, default=None,
                       help="override integrator step (s)")
    run_p.add_argument("--format", choices=("csv", "summary"),
                       default="summary", help="metrics report format")

    cmp_p = sub.add_parser("compare",
                           help="run several variants on one scenario")
    cmp_p.add_argument("--scenario", required=True)
    cmp_p.add_argument("--controller", default=",".join(v.value for v in Variant),
                       help="comma-separated variant list (>= 2)")
    cmp_p.add_argument("--out", default=None, help="combined CSV output path")
    cmp_p.add_argument("--tfinal", type=float, default=None)
    cmp_p.add_argument("--dt", type=float, default=None)
    cmp_p.add_argument("--format", choices=("csv", "summary"), default="summary")

    val_p = sub.add_parser("validate", help="check a scenario without running")
    val_p.add_argument("--scenario", required=True)
    return parser


def _parse_variant(name: str) -> Variant:
    try:
        return Variant(name.upper())
    except ValueError:
        raise ScenarioError(
            f"unknown controller {name!r}; expected one of "
            f"{[v.value for v in Variant]}")


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario)
    controller = None
    if getattr(args, "controller_single", None):
        controller = _parse_variant(args.controller_single)
    return scenario.with_overrides(controller=controller,
                                   t_final=getattr(args, "tfinal", None),
                                   dt=getattr(args, "dt", None))


def cmd_run(args) -> int:
    args.controller_single = args.controller
    try:
        scenario = _load(args)
    except ScenarioError as exc:
        print(f"scenario rejected: {exc}", file=sys.stderr)
        return EXIT_SCENARIO

    out = Path(args.out) if args.out else Path(f"uuvsim_{scenario.controller.value}.csv")
    try:
        sim_log = engine.run(scenario)
    except SimAbort as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        if exc.partial_log is not None and exc.partial_log.records:
            exc.partial_log.to_csv(out)
            print(f"partial log written to {out}", file=sys.stderr)
        return EXIT_RUNTIME

    sim_log.to_csv(out)
    log.info("log written to %s (%d records)", out, len(sim_log.records))
    report = metrics.compute_metrics(sim_log, scenario.settle_fraction,
                                     scenario.settle_floor)
    if args.format == "csv":
        print("\n".join(report.csv_rows()))
    else:
        print(report.render())
    return EXIT_OK


def _combined_header(sim_log: engine.SimLog) -> str:
    return ",".join(["variant"] + sim_log.columns)


def cmd_compare(args) -> int:
    names = [x for x in args.controller.split(",") if x]
    if len(names) < 2:
        print("compare needs at least two controller variants", file=sys.stderr)
        return EXIT_SCENARIO
    try:
        variants = [_parse_variant(n) for n in names]
        args.controller_single = None
        base = _load(args)
    except ScenarioError as exc:
        print(f"scenario rejected: {exc}", file=sys.stderr)
        return EXIT_SCENARIO

    rows = []
    combined_lines = []
    header_written = False
    worst_exit = EXIT_OK
    reports: dict[str, metrics.MetricsReport] = {}
    for variant in variants:
        try:
            scenario = base.with_overrides(controller=variant)
            sim_log = engine.run(scenario)
        except ScenarioError as exc:
            rows.append((variant.value, f"REJECTED: {exc}"))
            worst_exit = max(worst_exit, EXIT_SCENARIO)
            continue
        except SimAbort as exc:
            rows.append((variant.value, f"ABORTED at t={exc.t:.3g}: {exc.cause}"))
            worst_exit = max(worst_exit, EXIT_RUNTIME)
            continue
        if not header_written:
            combined_lines.append(_combined_header(sim_log))
            header_written = True
        for rec in sim_log.records:
            combined_lines.append(",".join([variant.value] + sim_log._row(rec)))
        report = metrics.compute_metrics(sim_log, base.settle_fraction,
                                         base.settle_floor)
        reports[variant.value] = report
        rows.append((variant.value, None))

    if args.out and combined_lines:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(combined_lines) + "\n")

    if args.format == "csv":
        out_rows = []
        for name, failure in rows:
            if failure is None:
                r = reports[name].csv_rows()
                out_rows.extend(r if not out_rows else r[1:])
        print("\n".join(out_rows))
    else:
        print(_ranking_table(rows, reports))
    return worst_exit


def _ranking_table(rows, reports) -> str:
    def sort_key(item):
        name, failure = item
        if failure is not None:
            return (2, math.inf)
        s = reports[name].worst_settling
        return (0, s) if s is not None else (1, math.inf)

    header = (f"{'variant':<8} {'settle_max(s)':>13} {'steady|e|':>10} "
              f"{'steady_z':>10} {'peak|tau1|':>10} {'violations':>10}")
    lines = [header, "-" * len(header)]
    for name, failure in sorted(rows, key=sort_key):
        if failure is not None:
            lines.append(f"{name:<8} {failure}")
            continue
        rep = reports[name]
        settle = rep.worst_settling
        settle_s = "never" if settle is None else f"{settle:.2f}"
        steady_e = max(m.steady_error_mean for m in rep.per_vehicle)
        steady_z = max(m.steady_z_mean for m in rep.per_vehicle)
        peak1 = max(m.peak_tau[0] for m in rep.per_vehicle)
        lines.append(f"{name:<8} {settle_s:>13} {steady_e:>10.3g} "
                     f"{steady_z:>10.3g} {peak1:>10.4g} "
                     f"{rep.total_violations:>10d}")
    return "\n".join(lines)


def cmd_validate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"FAIL: {exc}")
        return EXIT_SCENARIO

    ok = True
    report = validate_topology(scenario.topology, raise_on_error=False)
    print(f"topology: connected={report.connected} "
          f"strongly_connected={report.strongly_connected} "
          f"pinned={report.has_pinned} "
          f"min_eig_sym(L+B)={report.min_eig_sym_lb:.6g} "
          f"positive_definite={report.positive_definite}")
    ok &= report.valid

    print("scenario invariants: OK")

    theta0 = max(abs(st.theta) for st in scenario.initial)
    for variant, vg in sorted(scenario.gains.items(), key=lambda kv: kv[0].value):
        if vg.inner.shunting is None:
            print(f"stability conditions [{variant.value}]: not applicable "
                  "(no shunting compensator)")
            continue
        stab = check_stability_conditions(vg.inner, scenario.dt,
                                          max_abs_theta=theta0)
        print(f"stability conditions [{variant.value}] "
              f"(static check, |theta| <= {theta0:.3g}):")
        print(stab.render())
        ok &= stab.passed

    print("RESULT:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_SCENARIO


def main(argv=None) -> int:
    _configure_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "compare":
        return cmd_compare(args)
    return cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
