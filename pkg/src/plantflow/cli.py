"""Command-line interface.

    plantflow solve --species a_rubrum --format table
    plantflow solve --config chain.json --method both
    plantflow reproduce
    plantflow validate --config chain.json
    plantflow sweep --species a_rubrum --from 0 --to 1 --steps 11
    plantflow export --species p_virginiana --samples 500 --out rect.csv
    plantflow species --list

Machine-readable output goes to stdout, diagnostics to stderr.  Exit codes:
0 success, 1 solver or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

import numpy as np

from . import io as pio
from .chain import PlantChain, max_relative_deviation, solve
from .config import SolverConfig
from .curves import evaluate, validate
from .errors import ConfigError, PlantFlowError

METHOD_TOLERANCE = 1e-6


class CommandFailed(Exception):
    """Raised inside a command to exit with status 1 and a message on stderr."""


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-x", type=float, default=1e-10, help="potential tolerance, MPa")
    common.add_argument("--tol-f", type=float, default=1e-12, help="relative flow tolerance")
    common.add_argument("--grid", type=int, default=1000, help="scan and oracle grid points")
    return common


def _chain_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", type=Path, help="chain config JSON file")
    group.add_argument("--species", help="bundled species key (see `species --list`)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plantflow", description="Optimal water flow through a chain of plant segments."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()

    p = sub.add_parser("solve", parents=[common], help="solve one chain")
    _chain_source(p)
    p.add_argument("--format", choices=["json", "table", "csv"], default="json")
    p.add_argument("--method", choices=["algebraic", "bisection", "both"], default="algebraic")

    p = sub.add_parser("reproduce", parents=[common], help="solve all bundled species")
    p.add_argument("--format", choices=["table", "json", "csv"], default="table")

    p = sub.add_parser("validate", parents=[common], help="check curve conditions")
    _chain_source(p)
    p.add_argument("--format", choices=["table", "json"], default="table")

    p = sub.add_parser("sweep", parents=[common], help="solve across a parameter range")
    _chain_source(p)
    p.add_argument("--param", choices=["soil_potential"], default="soil_potential")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--method", choices=["algebraic", "bisection"], default="algebraic")
    p.add_argument("--format", choices=["csv"], default="csv")

    p = sub.add_parser("export", parents=[common], help="write flow rectangles as CSV")
    _chain_source(p)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--method", choices=["algebraic", "bisection"], default="algebraic")
    p.add_argument("--format", choices=["table"], default="table")

    p = sub.add_parser("species", parents=[common], help="list or show bundled species")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--list", action="store_true")
    group.add_argument("--show", metavar="KEY")
    p.add_argument("--format", choices=["table"], default="table")
    return parser


def _load_chain(args) -> PlantChain:
    if args.species is not None:
        try:
            return pio.species(args.species).chain
        except KeyError as exc:
            raise CommandFailed(str(exc.args[0])) from None
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandFailed(f"cannot read {args.config}: {exc.strerror}") from None
    return pio.parse_chain_config(text)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _csv(headers: list[str], rows: list[list]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue()


def _solution_headers(chain: PlantChain) -> list[str]:
    return [f"psi_{n}" for n in chain.names] + [
        "flow",
        f"{chain.names[0]}_capacity",
        "case",
        "bottleneck_index",
    ]


def _solution_row(solution, display: bool) -> list:
    num = _fmt if display else repr
    return [num(x) for x in solution.potentials] + [
        num(solution.flow),
        num(solution.isolated_first_capacity),
        solution.case.value,
        str(solution.bottleneck_index),
    ]


def cmd_solve(args, cfg: SolverConfig, out) -> int:
    chain = _load_chain(args)
    methods = ["algebraic", "bisection"] if args.method == "both" else [args.method]
    results = {m: solve(chain, cfg, m) for m in methods}
    deviation = None
    if args.method == "both":
        deviation = max_relative_deviation(results["algebraic"], results["bisection"])

    if args.format == "json":
        if deviation is None:
            out.write(pio.serialize_solution(results[args.method], chain))
        else:
            doc = {m: pio.solution_to_dict(s) for m, s in results.items()}
            doc["max_relative_deviation"] = deviation
            out.write(json.dumps(doc, indent=2) + "\n")
    else:
        display = args.format == "table"
        headers = (["method"] if deviation is not None else []) + _solution_headers(chain)
        rows = []
        for m, s in results.items():
            row = _solution_row(s, display)
            rows.append(([m] if deviation is not None else []) + row)
        out.write(_table(headers, rows) if display else _csv(headers, rows))
        if deviation is not None:
            out.write(f"max relative deviation: {deviation:.3e}\n")
    if deviation is not None and deviation > METHOD_TOLERANCE:
        raise CommandFailed(
            f"methods disagree: max relative deviation {deviation:.3e} > {METHOD_TOLERANCE:g}"
        )
    return 0


REPRODUCE_NOTE = (
    "h_annuus: conductances are bulk values (mmol s-1 MPa-1), not per leaf area; "
    "no midday reference; flows shown are computed from the bundled curves and "
    "are not on the same scale as the tree rows"
)


def reproduce_rows(cfg: SolverConfig) -> list[dict]:
    """Solve every bundled species with both methods and collect a summary row each."""
    rows = []
    for rec in pio.bundled_species():
        algebraic = solve(rec.chain, cfg, "algebraic")
        bisection = solve(rec.chain, cfg, "bisection")
        deviation = max_relative_deviation(algebraic, bisection)
        if deviation > METHOD_TOLERANCE:
            raise CommandFailed(
                f"{rec.key}: methods disagree (max relative deviation {deviation:.3e})"
            )
        psi_s, psi_l = algebraic.potentials
        row = {
            "species": rec.key,
            "psi_stem": psi_s,
            "psi_leaf": psi_l,
            "flow": algebraic.flow,
            "stem_capacity": algebraic.isolated_first_capacity,
            "case": algebraic.case.value,
            "bottleneck_index": algebraic.bottleneck_index,
            "midday_stem": None,
            "midday_leaf": None,
            "dev_stem": None,
            "dev_leaf": None,
            "method_deviation": deviation,
            "units": rec.units_note,
        }
        if rec.reference_midday is not None:
            mid_s, mid_l = rec.reference_midday
            row.update(
                midday_stem=mid_s,
                midday_leaf=mid_l,
                dev_stem=abs(psi_s - mid_s),
                dev_leaf=abs(psi_l - mid_l),
            )
        rows.append(row)
    return rows


def cmd_reproduce(args, cfg: SolverConfig, out) -> int:
    rows = reproduce_rows(cfg)
    if args.format == "json":
        out.write(json.dumps({"rows": rows, "notes": [REPRODUCE_NOTE]}, indent=2) + "\n")
        return 0
    keys = ["species", "psi_stem", "psi_leaf", "flow", "stem_capacity", "midday_stem",
            "midday_leaf", "dev_stem", "dev_leaf", "case", "bottleneck_index", "method_deviation"]
    if args.format == "csv":
        out.write(_csv(keys, [["" if r[k] is None else r[k] for k in keys] for r in rows]))
        return 0
    table_rows = []
    for r in rows:
        cells = [r["species"] + ("*" if r["midday_stem"] is None else "")]
        for k in keys[1:9]:
            cells.append("-" if r[k] is None else _fmt(r[k]))
        cells += [r["case"], str(r["bottleneck_index"]), f"{r['method_deviation']:.1e}"]
        table_rows.append(cells)
    headers = ["species", "psi_S", "psi_L", "F_max", "F_stem_max", "mid_S", "mid_L",
               "dev_S", "dev_L", "case", "k", "method_dev"]
    out.write(_table(headers, table_rows))
    out.write(f"* {REPRODUCE_NOTE}\n")
    return 0


def validation_report(chain: PlantChain) -> tuple[list[dict], list[str]]:
    report, failures = [], []
    x0 = chain.soil_potential
    for i, seg in enumerate(chain.segments, start=1):
        check = validate(seg.curve)
        k0 = evaluate(seg.curve, x0)
        entry = {
            "index": i,
            "name": seg.name,
            "curve": seg.curve.params(),
            "positive_decreasing": check.is_positive_decreasing,
            "tail_vanishes": check.tail_vanishes,
            "log_reciprocal_convex": check.log_reciprocal_convex,
            "k_at_soil": k0,
            "valid": check.overall_valid and k0 > 0.0,
        }
        report.append(entry)
        label = f"segment {i} ({seg.name})"
        failures += [f"{label}: {m}" for m in check.messages]
        if not check.is_positive_decreasing:
            failures.append(f"{label}: curve is not positive and decreasing")
        if not check.tail_vanishes:
            failures.append(f"{label}: psi*K(psi) does not vanish in the tail")
        if k0 <= 0.0:
            failures.append(f"{label}: K(x0) = 0 at soil potential {x0:g} MPa")
    return report, failures


def cmd_validate(args, cfg: SolverConfig, out) -> int:
    chain = _load_chain(args)
    report, failures = validation_report(chain)
    if args.format == "json":
        out.write(json.dumps({"segments": report, "valid": not failures}, indent=2) + "\n")
    else:
        yes = {True: "yes", False: "NO"}
        for e in report:
            params = " ".join(f"{k}={v:g}" for k, v in e["curve"].items() if k != "type")
            out.write(f"segment {e['index']} ({e['name']}): {e['curve']['type']} {params}\n")
            out.write(f"  positive and decreasing : {yes[e['positive_decreasing']]}\n")
            out.write(f"  psi*K(psi) -> 0         : {yes[e['tail_vanishes']]}\n")
            out.write(f"  ln(1/K) convex          : {yes[e['log_reciprocal_convex']]}\n")
            out.write(f"  K(x0) > 0               : {yes[e['k_at_soil'] > 0]} "
                      f"(K(x0) = {e['k_at_soil']:.6g})\n")
        out.write(f"chain valid: {yes[not failures]}\n")
    if failures:
        raise CommandFailed("\n".join(failures))
    return 0


def cmd_sweep(args, cfg: SolverConfig, out) -> int:
    if not args.start < args.stop:
        raise CommandFailed("--from must be smaller than --to")
    if args.steps < 2:
        raise CommandFailed("--steps must be >= 2")
    chain = _load_chain(args)
    headers = ["soil_potential"] + [f"psi_{n}" for n in chain.names] + [
        "flow", "bottleneck_index", "status"]
    rows, solved = [], 0
    for x0 in np.linspace(args.start, args.stop, args.steps):
        x0 = float(x0)
        try:
            s = solve(chain.with_soil_potential(x0), cfg, args.method)
        except PlantFlowError as exc:
            print(f"x0 = {x0!r}: {type(exc).__name__}: {exc}", file=sys.stderr)
            rows.append([repr(x0)] + [""] * (chain.n + 2) + ["infeasible"])
            continue
        solved += 1
        rows.append([repr(x0)] + [repr(x) for x in s.potentials]
                    + [repr(s.flow), s.bottleneck_index, "ok"])
    out.write(_csv(headers, rows))
    if not solved:
        raise CommandFailed("no sweep row could be solved")
    return 0


def cmd_export(args, cfg: SolverConfig, out) -> int:
    if args.samples < 2:
        raise CommandFailed("--samples must be >= 2")
    chain = _load_chain(args)
    s = solve(chain, cfg, args.method)
    text = pio.export_rectangles(chain, s, args.samples)
    try:
        args.out.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CommandFailed(f"cannot write {args.out}: {exc.strerror}") from None
    out.write(f"{args.out}\n")
    out.write(_table(_solution_headers(chain), [_solution_row(s, True)]))
    return 0


def cmd_species(args, cfg: SolverConfig, out) -> int:
    if args.list:
        rows = [[r.key, r.display_name, " -> ".join(r.chain.names), r.units_note]
                for r in pio.bundled_species()]
        out.write(_table(["key", "name", "segments", "units"], rows))
        return 0
    try:
        rec = pio.species(args.show)
    except KeyError as exc:
        raise CommandFailed(str(exc.args[0])) from None
    out.write(pio.chain_to_config(rec.chain))
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "reproduce": cmd_reproduce,
    "validate": cmd_validate,
    "sweep": cmd_sweep,
    "export": cmd_export,
    "species": cmd_species,
}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = SolverConfig(tol_x=args.tol_x, tol_f=args.tol_f, grid_points=args.grid)
    except ConfigError as exc:
        parser.error(str(exc))
    try:
        return COMMANDS[args.command](args, cfg, out)
    except CommandFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
    except PlantFlowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return 1


def run() -> None:
    sys.exit(main())
