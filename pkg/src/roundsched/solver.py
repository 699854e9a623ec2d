"""Deterministic branch and bound for the co-scheduling programs.

The continuous relaxation of each node is handed to scipy's HiGHS
backend; everything discrete (branching order, incumbent updates, exact
feasibility) is done here in plain integer arithmetic so that results do
not depend on floating point luck or on the worker count.

Search order is fixed: depth first, branch on the lowest-index
fractional variable, floor side first.  With workers > 1 the two child
relaxations of a node are computed eagerly in a thread pool, but they
are consumed in the same order as the serial search, so the explored
tree is identical.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .ilp import ILPInstance, check_assignment

_FRAC_TOL = 1e-6
_TIGHT_TOL = 1e-9


@dataclass
class SolverSolution:
    status: str  # "optimal" | "infeasible" | "timeout"
    values: dict[str, int] | None
    objective: int | None
    nodes: int


def _fractional_index(
    x: np.ndarray, tol: float, prefer: tuple[int, ...] = ()
) -> int | None:
    for i in prefer:
        if abs(x[i] - round(x[i])) > tol:
            return i
    for i, xi in enumerate(x):
        if abs(xi - round(xi)) > tol:
            return i
    return None


class _Search:
    def __init__(self, inst: ILPInstance, workers: int):
        self.inst = inst
        n = len(inst.variables)
        self.c = np.zeros(n)
        for i, cf in inst.objective.items():
            self.c[i] = cf
        le = [r for r in inst.rows if r.sense == "<="]
        eq = [r for r in inst.rows if r.sense == "=="]
        self.A_ub, self.b_ub = self._dense(le, n)
        self.A_eq, self.b_eq = self._dense(eq, n)
        self.pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    @staticmethod
    def _dense(rows, n):
        if not rows:
            return None, None
        a = np.zeros((len(rows), n))
        b = np.zeros(len(rows))
        for r_i, row in enumerate(rows):
            for v_i, cf in row.coeffs.items():
                a[r_i, v_i] = cf
            b[r_i] = row.rhs
        return a, b

    def relax(self, lb: tuple, ub: tuple):
        res = linprog(
            self.c,
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            A_eq=self.A_eq,
            b_eq=self.b_eq,
            bounds=list(zip(lb, ub)),
            method="highs",
        )
        if res.status == 4:
            res = linprog(
                self.c,
                A_ub=self.A_ub,
                b_ub=self.b_ub,
                A_eq=self.A_eq,
                b_eq=self.b_eq,
                bounds=list(zip(lb, ub)),
                method="highs",
                options={"presolve": False},
            )
        return res

    def close(self):
        if self.pool is not None:
            self.pool.shutdown(wait=False, cancel_futures=True)


def solve(
    inst: ILPInstance,
    *,
    budget_ms: int | None = None,
    workers: int = 1,
) -> SolverSolution:
    """Minimize the instance objective over integer points."""
    search = _Search(inst, workers)
    names = [v.name for v in inst.variables]
    # deciding the binaries first settles the structure of a solution
    # before any time variable is split
    prefer = tuple(i for i, v in enumerate(inst.variables) if v.binary)
    deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000.0

    lb0 = tuple(v.lb for v in inst.variables)
    ub0 = tuple(v.ub for v in inst.variables)
    best_vals: dict[str, int] | None = None
    best_obj: int | None = None
    nodes = 0
    stack: list[tuple[tuple, tuple, object]] = [(lb0, ub0, None)]

    def push_children(lb, ub, i, split):
        lo_lb, lo_ub = lb, tuple(
            split if k == i else u for k, u in enumerate(ub)
        )
        hi_lb, hi_ub = tuple(
            split + 1 if k == i else l for k, l in enumerate(lb)
        ), ub
        if search.pool is not None:
            hi_res: object = search.pool.submit(search.relax, hi_lb, hi_ub)
            lo_res: object = search.pool.submit(search.relax, lo_lb, lo_ub)
        else:
            hi_res = lo_res = None
        stack.append((hi_lb, hi_ub, hi_res))
        stack.append((lo_lb, lo_ub, lo_res))

    try:
        while stack:
            if deadline is not None and time.monotonic() > deadline:
                return SolverSolution("timeout", best_vals, best_obj, nodes)
            lb, ub, pending = stack.pop()
            nodes += 1
            if pending is None:
                res = search.relax(lb, ub)
            elif isinstance(pending, Future):
                res = pending.result()
            else:
                res = pending
            if res.status == 2:
                continue
            if res.status != 0:
                raise RuntimeError(f"relaxation failed with status {res.status}")
            if best_obj is not None and res.fun >= best_obj - 0.5:
                continue
            x = res.x
            i = _fractional_index(x, _FRAC_TOL, prefer)
            if i is None:
                vals = {names[k]: int(round(x[k])) for k in range(len(names))}
                if not check_assignment(inst, vals):
                    obj = sum(cf * vals[names[k]] for k, cf in inst.objective.items())
                    if best_obj is None or obj < best_obj:
                        best_obj = obj
                        best_vals = vals
                    continue
                # the rounded point is not actually feasible; split anyway
                i = _fractional_index(x, _TIGHT_TOL, prefer)
                if i is None:
                    i = next((k for k in range(len(lb)) if lb[k] < ub[k]), None)
                    if i is None:
                        continue
                    push_children(lb, ub, i, (lb[i] + ub[i]) // 2)
                    continue
            if lb[i] == ub[i]:
                # fractional value on a fixed variable is numerical noise;
                # make progress on some still-free variable instead
                i = next((k for k in range(len(lb)) if lb[k] < ub[k]), None)
                if i is None:
                    continue
                push_children(lb, ub, i, (lb[i] + ub[i]) // 2)
                continue
            split = min(max(math.floor(x[i]), lb[i]), ub[i] - 1)
            push_children(lb, ub, i, split)

        if best_vals is None:
            return SolverSolution("infeasible", None, None, nodes)
        return SolverSolution("optimal", best_vals, best_obj, nodes)
    finally:
        search.close()
