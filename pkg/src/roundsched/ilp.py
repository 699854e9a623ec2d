"""Integer program construction for co-scheduling tasks, messages, rounds.

All quantities are integers.  Time variables are expressed in grid ticks
(value * grid_us = microseconds) so every row has integer coefficients;
worst-case execution times, round lengths, and periods appear in
microseconds with a grid factor on the tick variables.

Variable families, in index order:
    o_<task>            task start offset, ticks, [0, (p - e) // g]
    mo_<msg>, md_<msg>  message window offset [0, p/g) and width (0, p/g]
    sp_<msg>            producer handoff slips one period
    sc_<msg>__<task>    consumer handoff slips one period
    d_<app>             worst chain latency of the app, microseconds
    y_*                 ordering choice for two tasks sharing a node
    rt<j>               round start, ticks, rounds kept sorted
    ka<j>_<msg>         message instances released by round j's start
    kd<j>_<msg>         message deadlines passed at round j's end
    n<j>_<msg>          data slots of round j granted to the message
    r0_<msg>            one instance is carried over the origin

Each served instance needs a round that starts at or after its release
and ends by its deadline, so the window width is bounded below by the
round length; that bound is baked into md's domain.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .model import Mode, ModeSchedule, Round, chains, hyperperiod
from .timing import NetworkParams, round_length


@dataclass(frozen=True)
class Variable:
    name: str
    lb: int
    ub: int
    binary: bool = False


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: dict[int, int]
    sense: str  # "<=" or "=="
    rhs: int


@dataclass
class ILPInstance:
    name: str
    variables: list[Variable] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    objective: dict[int, int] = field(default_factory=dict)
    index: dict[str, int] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add_var(self, name: str, lb: int, ub: int, binary: bool = False) -> int:
        assert name not in self.index, name
        self.index[name] = len(self.variables)
        self.variables.append(Variable(name, lb, ub, binary))
        return self.index[name]

    def add_row(self, name: str, coeffs: dict[int, int], sense: str, rhs: int) -> None:
        assert sense in ("<=", "==")
        self.rows.append(Row(name, {k: v for k, v in coeffs.items() if v}, sense, rhs))

    def var(self, name: str) -> int:
        return self.index[name]


class DecodeError(ValueError):
    """An assignment that should describe a schedule does not."""


_SAFE = re.compile(r"[^A-Za-z0-9]")


def _mk_safe() -> callable:
    taken: dict[str, str] = {}

    def safe(raw: str) -> str:
        if raw in taken:
            return taken[raw]
        base = _SAFE.sub("_", raw) or "id"
        cand = base
        n = 1
        while cand in taken.values():
            n += 1
            cand = f"{base}{n}"
        taken[raw] = cand
        return cand

    return safe


def _delta_values(p_i: int, p_j: int) -> list[int]:
    """Start-time differences two periodic patterns can realize, restricted
    to the range where executions could collide."""
    g = math.gcd(p_i, p_j)
    out = []
    k = -((p_i - 1) // g)
    while k * g < p_j:
        out.append(k * g)
        k += 1
    return out


def build_instance(
    mode: Mode,
    n_rounds: int,
    params: NetworkParams,
    grid_us: int = 1,
    t_max_us: int | None = None,
) -> ILPInstance:
    """Assemble the co-scheduling program for a fixed number of rounds."""
    h = hyperperiod(mode)
    t_r = round_length(params)
    n_slots = params.slots_per_round
    if t_max_us is None:
        t_max_us = h
    t_max_us = min(t_max_us, h)
    for app in mode.applications:
        if app.period_us % grid_us:
            raise ValueError(f"period of {app.id} not a multiple of grid {grid_us}")
    g = grid_us

    inst = ILPInstance(name=f"{mode.id}_r{n_rounds}")
    inst.meta = {
        "n_rounds": n_rounds,
        "grid_us": g,
        "t_max_us": t_max_us,
        "round_len_us": t_r,
        "hyperperiod_us": h,
        "slots_per_round": n_slots,
    }
    safe = _mk_safe()

    tasks = mode.all_tasks()
    msgs = mode.all_messages()
    period_of = {m.id: m.period_us for m in msgs.values()}

    # --- variables ----------------------------------------------------------
    md_lb = -(-t_r // g)  # window must be wide enough to hold one round
    for app in mode.applications:
        for t in app.tasks:
            inst.add_var(f"o_{safe(t.id)}", 0, (t.period_us - t.wcet_us) // g)
    for app in mode.applications:
        for m in app.messages:
            inst.add_var(f"mo_{safe(m.id)}", 0, m.period_us // g - 1)
            if md_lb > m.period_us // g:
                # no window of this period can contain a whole round
                inst.add_row(f"nofit_{safe(m.id)}", {}, "<=", -1)
            inst.add_var(
                f"md_{safe(m.id)}", min(md_lb, m.period_us // g), m.period_us // g
            )
    for app in mode.applications:
        for m in app.messages:
            inst.add_var(f"sp_{safe(m.id)}", 0, 1, binary=True)
        for _src, dst, mid in app.edges:
            inst.add_var(f"sc_{safe(mid)}__{safe(dst)}", 0, 1, binary=True)
    for app in mode.applications:
        inst.add_var(f"d_{safe(app.id)}", 0, app.deadline_us)

    task_list = sorted(tasks.values(), key=lambda t: t.id)
    pair_deltas: list[tuple] = []
    for i, ti in enumerate(task_list):
        for tj in task_list[i + 1 :]:
            if ti.node != tj.node:
                continue
            for k, dv in enumerate(_delta_values(ti.period_us, tj.period_us)):
                y = inst.add_var(
                    f"y_{safe(ti.id)}__{safe(tj.id)}__{k}", 0, 1, binary=True
                )
                pair_deltas.append((ti, tj, dv, y))

    rt_ub = (t_max_us - t_r) // g
    if n_rounds and rt_ub < 0:
        raise ValueError("round does not fit inside the horizon")
    for j in range(n_rounds):
        inst.add_var(f"rt{j}", 0, rt_ub)
    for j in range(n_rounds):
        for mid in sorted(msgs):
            k_m = h // period_of[mid]
            inst.add_var(f"ka{j}_{safe(mid)}", 0, k_m + 1)
            inst.add_var(f"kd{j}_{safe(mid)}", -1, k_m + 1)
    for j in range(n_rounds):
        for mid in sorted(msgs):
            inst.add_var(f"n{j}_{safe(mid)}", 0, n_slots)
    for mid in sorted(msgs):
        inst.add_var(f"r0_{safe(mid)}", 0, 1, binary=True)

    v = inst.var

    # --- objective ----------------------------------------------------------
    for app in mode.applications:
        inst.objective[v(f"d_{safe(app.id)}")] = 1

    # --- producer, consumer, chain latency ----------------------------------
    for app in mode.applications:
        p = app.period_us
        for m in app.messages:
            prod = app.task_by_id(app.producers(m.id)[0])
            inst.add_row(
                f"prod_{safe(m.id)}",
                {
                    v(f"o_{safe(prod.id)}"): g,
                    v(f"mo_{safe(m.id)}"): -g,
                    v(f"sp_{safe(m.id)}"): -p,
                },
                "<=",
                -prod.wcet_us,
            )
        for _src, dst, mid in app.edges:
            inst.add_row(
                f"cons_{safe(mid)}__{safe(dst)}",
                {
                    v(f"mo_{safe(mid)}"): g,
                    v(f"md_{safe(mid)}"): g,
                    v(f"o_{safe(dst)}"): -g,
                    v(f"sc_{safe(mid)}__{safe(dst)}"): -p,
                },
                "<=",
                0,
            )
        for c_idx, ch in enumerate(chains(app)):
            first = app.task_by_id(ch.first_task)
            last = app.task_by_id(ch.last_task)
            coeffs: dict[int, int] = {v(f"d_{safe(app.id)}"): -1}
            coeffs[v(f"o_{safe(last.id)}")] = coeffs.get(v(f"o_{safe(last.id)}"), 0) + g
            coeffs[v(f"o_{safe(first.id)}")] = (
                coeffs.get(v(f"o_{safe(first.id)}"), 0) - g
            )
            for k, mid in enumerate(ch.message_ids):
                cons = ch.task_ids[k + 1]
                coeffs[v(f"sp_{safe(mid)}")] = coeffs.get(v(f"sp_{safe(mid)}"), 0) + p
                sc = v(f"sc_{safe(mid)}__{safe(cons)}")
                coeffs[sc] = coeffs.get(sc, 0) + p
            inst.add_row(f"lat_{safe(app.id)}_{c_idx}", coeffs, "<=", -last.wcet_us)

    # --- round ordering -----------------------------------------------------
    for j in range(n_rounds - 1):
        inst.add_row(
            f"order_r{j}",
            {v(f"rt{j}"): g, v(f"rt{j + 1}"): -g},
            "<=",
            -t_r,
        )

    # --- shared-node task separation ----------------------------------------
    for ti, tj, dv, y in pair_deltas:
        oi, oj = v(f"o_{safe(ti.id)}"), v(f"o_{safe(tj.id)}")
        m_pair = ti.period_us + tj.period_us
        nm = f"apart_{safe(ti.id)}__{safe(tj.id)}__{dv}"
        # y = 1: instance of ti (shifted by dv) finishes before tj starts
        inst.add_row(
            nm + "_a", {oi: g, oj: -g, y: m_pair}, "<=", m_pair - ti.wcet_us - dv
        )
        # y = 0: tj finishes before the shifted instance of ti starts
        inst.add_row(nm + "_b", {oj: g, oi: -g, y: -m_pair}, "<=", dv - tj.wcet_us)

    # --- service windows vs rounds ------------------------------------------
    for j in range(n_rounds):
        rt = v(f"rt{j}")
        for mid in sorted(msgs):
            p = period_of[mid]
            mo = v(f"mo_{safe(mid)}")
            md = v(f"md_{safe(mid)}")
            ka = v(f"ka{j}_{safe(mid)}")
            kd = v(f"kd{j}_{safe(mid)}")
            # pin ka to the release count at the round's start
            inst.add_row(
                f"arr_{j}_{safe(mid)}_a", {rt: -g, mo: g, ka: p}, "<=", p
            )
            inst.add_row(
                f"arr_{j}_{safe(mid)}_b", {rt: g, mo: -g, ka: -p}, "<=", -1
            )
            # pin kd to the deadline count at the round's end
            inst.add_row(
                f"due_{j}_{safe(mid)}_a",
                {rt: -g, mo: g, md: g, kd: p},
                "<=",
                t_r + p - 1,
            )
            inst.add_row(
                f"due_{j}_{safe(mid)}_b",
                {rt: g, mo: -g, md: -g, kd: -p},
                "<=",
                -t_r,
            )
            # slots granted through round j never outrun arrivals at its start
            coeffs = {ka: -1, v(f"r0_{safe(mid)}"): -1}
            for k in range(j + 1):
                coeffs[v(f"n{k}_{safe(mid)}")] = 1
            inst.add_row(f"serve_hi_{j}_{safe(mid)}", coeffs, "<=", 0)
            # every deadline passed by round j's end is already served
            coeffs = {kd: 1, v(f"r0_{safe(mid)}"): 1}
            for k in range(j):
                coeffs[v(f"n{k}_{safe(mid)}")] = -1
            inst.add_row(f"serve_lo_{j}_{safe(mid)}", coeffs, "<=", 0)

    # --- slot capacity ------------------------------------------------------
    for j in range(n_rounds):
        inst.add_row(
            f"cap_{j}",
            {v(f"n{j}_{safe(mid)}"): 1 for mid in sorted(msgs)},
            "<=",
            n_slots,
        )

    # --- conservation -------------------------------------------------------
    for mid in sorted(msgs):
        inst.add_row(
            f"total_{safe(mid)}",
            {v(f"n{j}_{safe(mid)}"): 1 for j in range(n_rounds)},
            "==",
            h // period_of[mid],
        )

    return inst


def check_assignment(inst: ILPInstance, values: dict[str, int]) -> list[str]:
    """Exact integer verification of a full assignment; returns complaints."""
    bad = []
    for var in inst.variables:
        x = values[var.name]
        if not var.lb <= x <= var.ub:
            bad.append(f"{var.name}={x} outside [{var.lb}, {var.ub}]")
    for row in inst.rows:
        lhs = sum(c * values[inst.variables[i].name] for i, c in row.coeffs.items())
        if row.sense == "<=" and lhs > row.rhs:
            bad.append(f"{row.name}: {lhs} > {row.rhs}")
        elif row.sense == "==" and lhs != row.rhs:
            bad.append(f"{row.name}: {lhs} != {row.rhs}")
    return bad


def extract_schedule(
    inst: ILPInstance,
    values: dict[str, int],
    mode: Mode,
    params: NetworkParams,
) -> ModeSchedule:
    """Turn a verified assignment back into a schedule."""
    g = inst.meta["grid_us"]
    n_rounds = inst.meta["n_rounds"]
    n_slots = inst.meta["slots_per_round"]
    safe = _mk_safe()
    tasks = mode.all_tasks()
    msgs = mode.all_messages()
    # replay name generation in the same order as build_instance
    for app in mode.applications:
        for t in app.tasks:
            safe(t.id)
    for app in mode.applications:
        for m in app.messages:
            safe(m.id)

    rounds = []
    for j in range(n_rounds):
        alloc = []
        for mid in sorted(msgs):
            alloc.extend([mid] * values[f"n{j}_{safe(mid)}"])
        if len(alloc) > n_slots:
            raise DecodeError(f"round {j} oversubscribed: {alloc}")
        rounds.append(Round(values[f"rt{j}"] * g, tuple(alloc)))

    return ModeSchedule(
        mode_id=mode.id,
        hyperperiod_us=inst.meta["hyperperiod_us"],
        round_len_us=inst.meta["round_len_us"],
        task_offsets={tid: values[f"o_{safe(tid)}"] * g for tid in sorted(tasks)},
        message_offsets={mid: values[f"mo_{safe(mid)}"] * g for mid in sorted(msgs)},
        message_deadlines={mid: values[f"md_{safe(mid)}"] * g for mid in sorted(msgs)},
        rounds=tuple(rounds),
        leftover={mid: values[f"r0_{safe(mid)}"] for mid in sorted(msgs)},
    )
