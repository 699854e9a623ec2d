"""Core system model: tasks, messages, applications, modes, schedules.

All times are integer microseconds. Model objects are immutable after
construction; everything derived from a schedule run (offsets, deadlines,
round allocations) lives in ModeSchedule, not on the model objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

TimeUs = int

#: validate_spec refuses hyperperiods beyond this (about 11.6 days in us);
#: such inputs are almost certainly unit mistakes.
HYPERPERIOD_CAP_US = 10**12


class ModelError(ValueError):
    """Structural problem that prevents an operation from producing a result."""


@dataclass(frozen=True, slots=True)
class Task:
    """A periodic task mapped to one node.

    wcet_us is the budgeted execution time; the scheduler reserves exactly
    this much on the node.
    """

    id: str
    node: str
    wcet_us: int
    period_us: int


@dataclass(frozen=True, slots=True)
class Message:
    """A periodic message exchanged between tasks over the wireless bus."""

    id: str
    period_us: int


@dataclass(frozen=True, slots=True)
class Application:
    """A distributed application: a DAG of tasks with message-labelled edges.

    edges are (producer task id, consumer task id, message id) triples. A
    message appearing on several edges from the same producer is a multicast.
    Tasks and messages inherit the application's period.
    """

    id: str
    period_us: int
    deadline_us: int
    tasks: tuple[Task, ...]
    messages: tuple[Message, ...]
    edges: tuple[tuple[str, str, str], ...]

    def task_by_id(self, tid: str) -> Task:
        for t in self.tasks:
            if t.id == tid:
                return t
        raise KeyError(tid)

    def message_by_id(self, mid: str) -> Message:
        for m in self.messages:
            if m.id == mid:
                return m
        raise KeyError(mid)

    def producers(self, mid: str) -> tuple[str, ...]:
        """Task ids that emit message mid (sorted)."""
        return tuple(sorted({src for src, _, m in self.edges if m == mid}))

    def consumers(self, mid: str) -> tuple[str, ...]:
        """Task ids that receive message mid (sorted)."""
        return tuple(sorted({dst for _, dst, m in self.edges if m == mid}))

    def preceding_messages(self, tid: str) -> tuple[str, ...]:
        """Message ids that must be delivered before task tid runs (sorted)."""
        return tuple(sorted({m for _, dst, m in self.edges if dst == tid}))


@dataclass(frozen=True, slots=True)
class Chain:
    """One maximal source-to-sink path, alternating task and message ids."""

    app_id: str
    items: tuple[str, ...]

    @property
    def task_ids(self) -> tuple[str, ...]:
        return self.items[0::2]

    @property
    def message_ids(self) -> tuple[str, ...]:
        return self.items[1::2]

    @property
    def first_task(self) -> str:
        return self.items[0]

    @property
    def last_task(self) -> str:
        return self.items[-1]


@dataclass(frozen=True, slots=True)
class Mode:
    """A set of applications that run together under one round schedule."""

    id: str
    applications: tuple[Application, ...]

    def all_tasks(self) -> dict[str, Task]:
        out: dict[str, Task] = {}
        for app in self.applications:
            for t in app.tasks:
                out[t.id] = t
        return out

    def all_messages(self) -> dict[str, Message]:
        out: dict[str, Message] = {}
        for app in self.applications:
            for m in app.messages:
                out[m.id] = m
        return out


@dataclass(frozen=True, slots=True)
class Round:
    """One communication round: start time and its slot allocation.

    alloc has one entry per data slot, a message id or None for an idle slot.
    The round length is a property of the network parameters, not stored here.
    """

    t: TimeUs
    alloc: tuple[Optional[str], ...]

    def count(self, mid: str) -> int:
        return sum(1 for a in self.alloc if a == mid)


@dataclass(slots=True)
class ModeSchedule:
    """Synthesized schedule for one mode.

    Offsets are relative to the hyperperiod start. leftover maps each message
    to its carried-over instance count at the hyperperiod boundary (0 or 1).
    """

    mode_id: str
    hyperperiod_us: int
    round_len_us: int
    task_offsets: dict[str, int]
    message_offsets: dict[str, int]
    message_deadlines: dict[str, int]
    rounds: tuple[Round, ...]
    leftover: dict[str, int]


def hyperperiod(mode: Mode) -> int:
    """Least common multiple of the member application periods.

    >>> a = Application("a", 10_000, 10_000, (), (), ())
    >>> b = Application("b", 15_000, 15_000, (), (), ())
    >>> hyperperiod(Mode("m", (a, b)))
    30000

    Raises ModelError for an empty mode or a result beyond
    HYPERPERIOD_CAP_US (treated as a unit mistake).
    """
    if not mode.applications:
        raise ModelError(f"mode {mode.id!r} has no applications")
    periods = [app.period_us for app in mode.applications]
    if any(p <= 0 for p in periods):
        raise ModelError(f"mode {mode.id!r} has a non-positive period")
    h = math.lcm(*periods)
    if h > HYPERPERIOD_CAP_US:
        raise ModelError(
            f"hyperperiod of mode {mode.id!r} is {h} us, beyond the "
            f"{HYPERPERIOD_CAP_US} us cap"
        )
    return h


def chains(app: Application) -> tuple[Chain, ...]:
    """All maximal paths of the application DAG, in lexicographic order.

    Each chain alternates task and message ids, starting and ending with a
    task. A task with neither incoming nor outgoing edges forms a one-item
    chain. Raises ModelError if the graph has a cycle.

    >>> t1 = Task("t1", "n1", 1000, 10_000); t2 = Task("t2", "n2", 1000, 10_000)
    >>> m = Message("m1", 10_000)
    >>> app = Application("a", 10_000, 10_000, (t1, t2), (m,), (("t1", "t2", "m1"),))
    >>> [c.items for c in chains(app)]
    [('t1', 'm1', 't2')]
    """
    _check_acyclic(app)
    out_edges: dict[str, list[tuple[str, str]]] = {t.id: [] for t in app.tasks}
    has_in: set[str] = set()
    for src, dst, mid in app.edges:
        out_edges[src].append((mid, dst))
        has_in.add(dst)
    for lst in out_edges.values():
        lst.sort()

    result: list[tuple[str, ...]] = []

    def walk(prefix: list[str], tid: str) -> None:
        succ = out_edges.get(tid, ())
        if not succ:
            result.append(tuple(prefix))
            return
        for mid, dst in succ:
            prefix.extend((mid, dst))
            walk(prefix, dst)
            del prefix[-2:]

    for t in sorted(app.tasks, key=lambda t: t.id):
        if t.id not in has_in:
            walk([t.id], t.id)
    result.sort()
    return tuple(Chain(app.id, items) for items in result)


def _check_acyclic(app: Application) -> None:
    adj: dict[str, list[str]] = {t.id: [] for t in app.tasks}
    for src, dst, _ in app.edges:
        if src in adj and dst in adj:
            adj[src].append(dst)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {tid: WHITE for tid in adj}
    stack: list[tuple[str, Iterable[str]]] = []
    for start in adj:
        if color[start] != WHITE:
            continue
        color[start] = GREY
        stack.append((start, iter(adj[start])))
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = BLACK
                stack.pop()
            elif color[nxt] == GREY:
                raise ModelError(f"application {app.id!r} graph has a cycle")
            elif color[nxt] == WHITE:
                color[nxt] = GREY
                stack.append((nxt, iter(adj[nxt])))


@dataclass(frozen=True, slots=True)
class Violation:
    code: str
    where: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code} at {self.where}: {self.detail}"


@dataclass(slots=True)
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, where: str, detail: str) -> None:
        self.violations.append(Violation(code, where, detail))

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def validate_application(app: Application, report: ValidationReport) -> None:
    where = f"application {app.id}"
    if app.period_us <= 0:
        report.add("bad_period", where, f"period {app.period_us} us")
    if app.deadline_us <= 0:
        report.add("bad_deadline", where, f"deadline {app.deadline_us} us")
    elif app.deadline_us > app.period_us:
        report.add(
            "deadline_exceeds_period",
            where,
            f"deadline {app.deadline_us} us > period {app.period_us} us",
        )

    seen_tasks: set[str] = set()
    for t in app.tasks:
        tw = f"{where}, task {t.id}"
        if t.id in seen_tasks:
            report.add("duplicate_task", tw, "listed twice")
        seen_tasks.add(t.id)
        if t.wcet_us <= 0:
            report.add("bad_wcet", tw, f"wcet {t.wcet_us} us")
        elif t.wcet_us > app.period_us > 0:
            report.add(
                "bad_wcet", tw, f"wcet {t.wcet_us} us exceeds period {app.period_us} us"
            )
        if t.period_us != app.period_us:
            report.add(
                "task_period_mismatch",
                tw,
                f"task period {t.period_us} us != {app.period_us} us",
            )

    seen_msgs: set[str] = set()
    for m in app.messages:
        mw = f"{where}, message {m.id}"
        if m.id in seen_msgs:
            report.add("duplicate_message", mw, "listed twice")
        seen_msgs.add(m.id)
        if m.period_us != app.period_us:
            report.add(
                "message_period_mismatch",
                mw,
                f"message period {m.period_us} us != {app.period_us} us",
            )

    for src, dst, mid in app.edges:
        ew = f"{where}, edge {src}->{dst}"
        if src not in seen_tasks:
            report.add("unknown_edge_task", ew, f"producer {src!r} not in app")
        if dst not in seen_tasks:
            report.add("unknown_edge_task", ew, f"consumer {dst!r} not in app")
        if mid not in seen_msgs:
            report.add("unknown_edge_message", ew, f"message {mid!r} not in app")

    try:
        _check_acyclic(app)
    except ModelError:
        report.add("graph_cycle", where, "task graph has a cycle")
        return

    for m in app.messages:
        mw = f"{where}, message {m.id}"
        prods = app.producers(m.id)
        if not prods:
            report.add("message_no_producer", mw, "no producing task")
            continue
        nodes = set()
        for tid in prods:
            try:
                nodes.add(app.task_by_id(tid).node)
            except KeyError:
                pass
        if len(nodes) > 1:
            report.add(
                "multi_node_producers",
                mw,
                f"producers map to several nodes: {sorted(nodes)}",
            )


def validate_mode(mode: Mode, report: ValidationReport) -> None:
    where = f"mode {mode.id}"
    if not mode.applications:
        report.add("empty_mode", where, "no applications")
        return
    for app in mode.applications:
        validate_application(app, report)
    # shared tasks/messages must agree on their attributes
    tasks_seen: dict[str, Task] = {}
    msgs_seen: dict[str, Message] = {}
    for app in mode.applications:
        for t in app.tasks:
            prev = tasks_seen.setdefault(t.id, t)
            if prev != t:
                report.add(
                    "shared_task_mismatch",
                    f"{where}, task {t.id}",
                    "differs between applications",
                )
        for m in app.messages:
            prev_m = msgs_seen.setdefault(m.id, m)
            if prev_m != m:
                report.add(
                    "shared_message_mismatch",
                    f"{where}, message {m.id}",
                    "differs between applications",
                )
    try:
        hyperperiod(mode)
    except ModelError as exc:
        report.add("hyperperiod_overflow", where, str(exc))


def validate_modes_disjoint(modes: Iterable[Mode], report: ValidationReport) -> None:
    owner: dict[str, str] = {}
    for mode in modes:
        for app in mode.applications:
            prev = owner.setdefault(app.id, mode.id)
            if prev != mode.id:
                report.add(
                    "app_in_multiple_modes",
                    f"application {app.id}",
                    f"appears in modes {prev!r} and {mode.id!r}",
                )


@dataclass(frozen=True, slots=True)
class SystemSpec:
    """Everything a parsed input file describes.

    network is a timing.NetworkParams, synth a synthesis.SynthConfig; both are
    kept untyped here so the model layer stays import-free.
    """

    network: object
    applications: tuple[Application, ...]
    modes: tuple[Mode, ...]
    synth: object = None

    def mode_by_id(self, mid: str) -> Mode:
        for m in self.modes:
            if m.id == mid:
                return m
        raise KeyError(mid)


def validate_spec(spec: SystemSpec) -> ValidationReport:
    """Structural validation of a whole system description.

    Collects every violation instead of stopping at the first; an empty
    report means the synthesizer can be run on any of the modes.
    """
    report = ValidationReport()
    moded = {app.id for mode in spec.modes for app in mode.applications}
    for app in spec.applications:
        if app.id not in moded:
            validate_application(app, report)
    for mode in spec.modes:
        validate_mode(mode, report)
    validate_modes_disjoint(spec.modes, report)
    return report
