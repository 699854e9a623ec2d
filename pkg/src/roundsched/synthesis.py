"""Round-count search wrapped around the integer program.

Round counts are tried in increasing order starting from zero; the first
count whose program has an integer solution wins, so the schedule uses
as few communication rounds as possible and, for that count, minimizes
the summed worst-case chain latency of the applications.
"""

from __future__ import annotations

from dataclasses import dataclass

from .checker import check
from .ilp import build_instance, extract_schedule
from .model import Mode, ModeSchedule, ValidationReport, hyperperiod, validate_mode
from .solver import solve
from .timing import NetworkParams, round_length


@dataclass
class SynthConfig:
    grid_us: int = 1
    t_max_us: int | None = None
    solver_budget_ms: int | None = None
    workers: int = 1


@dataclass
class SynthesisOutcome:
    status: str  # "feasible" | "infeasible" | "timeout"
    schedule: ModeSchedule | None
    rounds_used: int | None
    objective_us: int | None
    solver_calls: int
    nodes_total: int


def max_rounds(mode: Mode, params: NetworkParams, config: SynthConfig) -> int:
    """Largest number of rounds that fits the scheduling horizon."""
    h = hyperperiod(mode)
    horizon = h if config.t_max_us is None else min(config.t_max_us, h)
    return horizon // round_length(params)


def synthesize(
    mode: Mode,
    params: NetworkParams,
    config: SynthConfig | None = None,
) -> SynthesisOutcome:
    """Search for a schedule of the mode, trying round counts 0, 1, ..."""
    if config is None:
        config = SynthConfig()
    report = ValidationReport()
    validate_mode(mode, report)
    if not report.ok:
        raise ValueError(f"mode {mode.id} is not well formed: {sorted(report.codes())}")

    r_max = max_rounds(mode, params, config)
    calls = 0
    nodes = 0
    for n_rounds in range(r_max + 1):
        inst = build_instance(
            mode, n_rounds, params, grid_us=config.grid_us, t_max_us=config.t_max_us
        )
        sol = solve(inst, budget_ms=config.solver_budget_ms, workers=config.workers)
        calls += 1
        nodes += sol.nodes
        if sol.status == "timeout":
            return SynthesisOutcome("timeout", None, None, None, calls, nodes)
        if sol.status == "optimal":
            schedule = extract_schedule(inst, sol.values, mode, params)
            audit = check(mode, schedule, params)
            if not audit.ok:
                raise RuntimeError(
                    "synthesized schedule failed its own audit: "
                    f"{sorted(audit.failed())}"
                )
            return SynthesisOutcome(
                "feasible", schedule, n_rounds, sol.objective, calls, nodes
            )
    return SynthesisOutcome("infeasible", None, None, None, calls, nodes)
