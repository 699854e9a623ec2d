"""Command line front end.

Subcommands: synth (search for a schedule), check (audit a schedule
against a spec), simulate (run the beacon protocol over schedules), and
model (emit timing and energy tables as CSV).

Exit codes: 0 success, 1 usage or input error (including a solver that
ran out of budget), 2 proven infeasible, 3 schedule audit violations.
JSON results go to stdout unless an output file is named; human status
lines go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

from .checker import check
from .ilp import build_instance
from .lpformat import write_lp
from .model import ValidationReport, validate_mode, validate_modes_disjoint
from .sim import simulate
from .specio import (
    SpecError,
    dumps,
    load_json,
    parse_scenario,
    parse_schedule,
    parse_spec,
    report_to_obj,
    schedule_to_obj,
    trace_to_obj,
)
from .synthesis import SynthConfig, synthesize
from .timing import (
    ENERGY_GRID_HEADER,
    ROUND_GRID_HEADER,
    NetworkParams,
    energy_saving_grid,
    round_length_grid,
)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _status(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_spec(path: str):
    spec = parse_spec(load_json(path))
    problems = []
    for mode in spec.modes:
        rep = ValidationReport()
        validate_mode(mode, rep)
        problems.extend(f"mode {mode.id}: {v}" for v in rep.violations)
    rep = ValidationReport()
    validate_modes_disjoint(spec.modes, rep)
    problems.extend(str(v) for v in rep.violations)
    if problems:
        raise SpecError("; ".join(problems))
    return spec


def _pick_mode(spec, mode_id: str | None):
    if mode_id is None:
        if len(spec.modes) == 1:
            return spec.modes[0]
        raise SpecError(
            f"--mode is required, spec has {len(spec.modes)} modes: "
            + ", ".join(m.id for m in spec.modes)
        )
    try:
        return spec.mode_by_id(mode_id)
    except KeyError:
        raise SpecError(f"unknown mode {mode_id}") from None


def _cmd_synth(args) -> int:
    spec = _load_spec(args.spec)
    mode = _pick_mode(spec, args.mode)
    config = SynthConfig(
        grid_us=spec.grid_us,
        t_max_us=args.t_max_us,
        solver_budget_ms=args.budget_ms,
        workers=args.workers,
    )
    out = synthesize(mode, spec.network, config)
    if args.lp_dir is not None:
        os.makedirs(args.lp_dir, exist_ok=True)
        for r in range(out.solver_calls):
            inst = build_instance(
                mode, r, spec.network, grid_us=config.grid_us, t_max_us=config.t_max_us
            )
            write_lp(inst, os.path.join(args.lp_dir, f"{mode.id}_r{r}.lp"))
    if out.status == "feasible":
        _emit(dumps(schedule_to_obj(out.schedule)), args.out)
        _status(
            f"feasible: {out.rounds_used} rounds, objective {out.objective_us} us, "
            f"{out.solver_calls} solver calls"
        )
        return 0
    if out.status == "infeasible":
        _status(f"infeasible: exhausted round counts after {out.solver_calls} solver calls")
        return 2
    _status(f"timeout: solver budget exhausted after {out.solver_calls} solver calls")
    return 1


def _cmd_check(args) -> int:
    spec = _load_spec(args.spec)
    schedule = parse_schedule(load_json(args.schedule))
    mode = _pick_mode(spec, args.mode if args.mode else schedule.mode_id)
    report = check(mode, schedule, spec.network)
    _emit(dumps(report_to_obj(report)), args.report)
    if report.ok:
        _status("schedule passes all checks")
        return 0
    _status(
        "schedule violates: " + ", ".join(sorted(report.failed()))
    )
    return 3


def _cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    scenario = parse_scenario(load_json(args.scenario))
    table = {}
    for entry in args.schedule:
        if "=" not in entry:
            raise SpecError(f"--schedule wants MODE=FILE, got {entry!r}")
        mode_id, path = entry.split("=", 1)
        mode = _pick_mode(spec, mode_id)
        schedule = parse_schedule(load_json(path))
        if schedule.mode_id != mode_id:
            raise SpecError(
                f"{path} is a schedule for {schedule.mode_id}, not {mode_id}"
            )
        table[mode_id] = (mode, schedule)
    needed = {scenario.initial_mode} | {s.to_mode for s in scenario.switches}
    missing = sorted(needed - set(table))
    if missing:
        raise SpecError("no schedule given for mode(s): " + ", ".join(missing))
    bad = []
    for mode_id, (mode, schedule) in sorted(table.items()):
        rep = check(mode, schedule, spec.network)
        if not rep.ok:
            bad.append(f"{mode_id}: " + ", ".join(sorted(rep.failed())))
    if bad:
        _status("schedule audit failed; " + "; ".join(bad))
        return 3
    trace = simulate(table, scenario)
    _emit(dumps(trace_to_obj(trace)), args.trace)
    _status(
        f"simulated {trace.beacons_sent} rounds: {trace.beacons_missed} missed "
        f"beacons, {trace.transmissions} transmissions, "
        f"{trace.collisions} collisions, {trace.resyncs} resyncs"
    )
    return 0


def _parse_range(text: str, flag: str) -> list[int]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [int(parts[0])]
        if len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
    except ValueError:
        pass
    raise SpecError(f"{flag} wants N or LO:HI, got {text!r}")


def _cmd_model(args) -> int:
    if args.spec is not None:
        base = _load_spec(args.spec).network
    else:
        if args.hops is None or args.slots is None or args.payload is None:
            raise SpecError("model needs --spec or all of --hops, --slots, --payload")
        base = NetworkParams(hops=1, slots_per_round=1, payload_bytes=1)
    hops = _parse_range(args.hops, "--hops") if args.hops else [base.hops]
    slots = _parse_range(args.slots, "--slots") if args.slots else [base.slots_per_round]
    payloads = (
        _parse_range(args.payload, "--payload") if args.payload else [base.payload_bytes]
    )
    lines = []
    if args.table == "round-length":
        lines.append(",".join(ROUND_GRID_HEADER))
        for l in payloads:
            for row in round_length_grid(base, hops, slots, l):
                lines.append(",".join(str(x) for x in row))
    else:
        lines.append(",".join(ENERGY_GRID_HEADER))
        for h in hops:
            ph = NetworkParams(
                hops=h,
                slots_per_round=base.slots_per_round,
                payload_bytes=base.payload_bytes,
                retransmissions=base.retransmissions,
                beacon_bytes=base.beacon_bytes,
                cal_bytes=base.cal_bytes,
                header_bytes=base.header_bytes,
                bitrate_bps=base.bitrate_bps,
                wakeup_us=base.wakeup_us,
                start_us=base.start_us,
                radio_delay_us=base.radio_delay_us,
                gap_us=base.gap_us,
            )
            for row in energy_saving_grid(ph, payloads, slots):
                lines.append(
                    ",".join(str(x) for x in row[:-1]) + f",{float(row[-1]):.6f}"
                )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="roundsched",
        description="Co-schedule tasks, messages and communication rounds.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a schedule for one mode")
    p.add_argument("--spec", required=True, help="system spec JSON")
    p.add_argument("--mode", help="mode id (defaults to the only mode)")
    p.add_argument("--out", help="write the schedule JSON here instead of stdout")
    p.add_argument("--lp-dir", help="dump one LP file per attempted round count")
    p.add_argument("--budget-ms", type=int, help="per-round-count solver budget")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--t-max-us", type=int, help="cap on the scheduling horizon")
    p.set_defaults(run=_cmd_synth)

    p = sub.add_parser("check", help="audit a schedule against a spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--schedule", required=True, help="schedule JSON to audit")
    p.add_argument("--mode", help="mode id (defaults to the schedule's mode_id)")
    p.add_argument("--report", help="write the report JSON here instead of stdout")
    p.set_defaults(run=_cmd_check)

    p = sub.add_parser("simulate", help="run the beacon protocol over schedules")
    p.add_argument("--spec", required=True)
    p.add_argument("--scenario", required=True, help="scenario JSON")
    p.add_argument(
        "--schedule",
        action="append",
        default=[],
        metavar="MODE=FILE",
        help="schedule JSON for a mode; repeat per mode",
    )
    p.add_argument("--trace", help="write the trace JSON here instead of stdout")
    p.set_defaults(run=_cmd_simulate)

    p = sub.add_parser("model", help="emit timing or energy tables as CSV")
    p.add_argument(
        "--table",
        choices=("round-length", "energy"),
        required=True,
    )
    p.add_argument("--spec", help="take base network parameters from this spec")
    p.add_argument("--hops", help="N or LO:HI")
    p.add_argument("--slots", help="N or LO:HI")
    p.add_argument("--payload", help="N or LO:HI")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(run=_cmd_model)
    return top


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (SpecError, ValueError, OSError) as e:
        _status(f"error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
