"""Command line entry point.

    carrieralloc allocate SCENARIO [--tolerance D] [--verify] [--json]
    carrieralloc sweep SCENARIO --carrier ID --from A --to B --step S --out FILE.csv
                       [--tolerance D] [--verify] [--workers N]

``SCENARIO`` is a path, or ``bundled:<name>`` for a scenario shipped with the
package. Exit status: 0 on success, 1 on solver failure or a failed
certificate, 2 on a bad scenario or arguments, 3 on an I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .allocator import allocate
from .errors import AllocationError, ScenarioError
from .oracle import kkt_check
from .scenario import load_bundled, load_scenario, run_sweep, sweep_values, write_csv

EXIT_OK, EXIT_SOLVER, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3
STATIONARITY_TOL = 1e-3


def _load(arg, tolerance):
    sc = load_bundled(arg.split(":", 1)[1]) if arg.startswith("bundled:") else load_scenario(arg)
    if tolerance is not None:
        if not tolerance > 0:
            raise ScenarioError("--tolerance must be > 0")
        sc = replace(sc, tolerance=tolerance)
    return sc


def _print_report(report, out):
    print(f"tolerance {report.tolerance:g}", file=out)
    for st in report.stages:
        if st.result is None:
            print(f"carrier {st.carrier_id}: no users in range, capacity {st.capacity:g} unallocated", file=out)
            continue
        print(f"carrier {st.carrier_id}: R={st.capacity:g} {st.case.case.label} "
              f"price={st.result.shadow_price:.6g} residual={st.result.residual:.3g}", file=out)
        for uid in sorted(st.result.rates):
            print(f"  user {uid:>3}  q={st.deficits.get(uid, 0.0):<8.6g} reserved={st.reservations[uid]:<8.6g}"
                  f" rate={st.result.rates[uid]:.6g}", file=out)
    print("final rates", file=out)
    for uid in sorted(report.final_rates):
        flag = "  (unreachable)" if uid in report.unreachable else ""
        print(f"  user {uid:>3}  r={report.final_rates[uid]:.6g}{flag}", file=out)


def cmd_allocate(args, out) -> int:
    sc = _load(args.scenario, args.tolerance)
    if sc.unfixed:
        raise ScenarioError(f"carrier(s) {sorted(sc.unfixed)} have only a sweep block; "
                            "give a capacity or use 'sweep'")
    report = allocate(sc.users, sc.carriers, sc.tolerance)
    status = EXIT_OK
    certs = {}
    if args.verify:
        for st in report.stages:
            if st.result is None:
                continue
            k = kkt_check(st.stage_input, st.result.rates, st.result.shadow_price, sc.tolerance)
            certs[st.carrier_id] = k
            if not k.passes(STATIONARITY_TOL, sc.tolerance * st.capacity):
                status = EXIT_SOLVER
    if args.json:
        doc = report.to_dict()
        if args.verify:
            doc["kkt"] = {str(c): vars(k) for c, k in certs.items()}
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        _print_report(report, out)
        for c, k in certs.items():
            print(f"kkt carrier {c}: stationarity={k.stationarity:.3g} slackness={k.slackness:.3g} "
                  f"budget={k.budget_residual:.3g}", file=out)
    return status


def cmd_sweep(args, out) -> int:
    sc = _load(args.scenario, args.tolerance)
    spec = sc.sweep
    carrier = args.carrier if args.carrier is not None else (spec.carrier_id if spec else None)
    if carrier is None:
        raise ScenarioError("no --carrier given and the scenario has no sweep block")
    bounds = [args.start, args.stop, args.step]
    if spec is not None and spec.carrier_id == carrier:
        bounds = [b if b is not None else d for b, d in zip(bounds, (spec.start, spec.stop, spec.step))]
    if any(b is None for b in bounds):
        raise ScenarioError("sweep needs --from, --to and --step (or a sweep block in the scenario)")
    others = sc.unfixed - {carrier}
    if others:
        raise ScenarioError(f"carrier(s) {sorted(others)} have no fixed capacity")

    rows = run_sweep(sc, carrier, sweep_values(*bounds), workers=args.workers, verify=args.verify)
    write_csv(rows, args.out, sc.user_ids, sc.carrier_ids)

    status = EXIT_OK
    for row in rows:
        if row.error is not None:
            print(f"sweep value {row.value:g}: {row.error}", file=sys.stderr)
            status = EXIT_SOLVER
        for c, k in row.kkt.items():
            if not k.passes(STATIONARITY_TOL, sc.tolerance * row_capacity(sc, carrier, row.value, c)):
                print(f"sweep value {row.value:g}, carrier {c}: KKT check failed {k}", file=sys.stderr)
                status = EXIT_SOLVER
    print(f"wrote {len(rows)} rows to {args.out}", file=out)
    return status


def row_capacity(sc, swept, value, carrier_id):
    if carrier_id == swept:
        return value
    return next(c.capacity for c in sc.carriers if c.id == carrier_id)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="carrieralloc",
                                description="Multi-carrier rate allocation with VIP/Regular user classes.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file, or bundled:<name>")
    common.add_argument("--tolerance", type=float, default=None, help="override the scenario's tolerance")
    common.add_argument("--verify", action="store_true", help="attach KKT certificates to every stage")
    common.add_argument("-v", "--verbose", action="store_true")

    a = sub.add_parser("allocate", parents=[common], help="run one allocation and print the report")
    a.add_argument("--json", action="store_true", help="print the report as JSON")
    a.set_defaults(func=cmd_allocate)

    s = sub.add_parser("sweep", parents=[common], help="sweep one carrier's capacity and write a CSV")
    s.add_argument("--carrier", type=int, default=None)
    s.add_argument("--from", dest="start", type=float, default=None)
    s.add_argument("--to", dest="stop", type=float, default=None)
    s.add_argument("--step", type=float, default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AllocationError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
