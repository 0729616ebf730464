"""Mixed-integer linear problem container and the pluggable solver layer.

A :class:`MilpProblem` is a plain data structure (variables with bounds
and integrality, sparse rows, linear objective, per-binary branching
priorities).  Backends translate it for an actual solver; the bundled
backend drives HiGHS through :func:`scipy.optimize.milp`.  HiGHS exposes
no branching priorities, so that backend records the silent fallback in
its report instead of honoring them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp


@dataclass
class SolveReport:
    status: str                 # optimal | gap_reached | time_limit | infeasible
    objective_value: float      # +inf when no incumbent exists
    best_bound: float
    wall_time: float
    node_count: int = 0
    rel_gap: float = 0.0
    priorities_honored: bool = True
    note: str = ""

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.objective_value)


class MilpProblem:
    """Sparse minimization problem with named variables."""

    def __init__(self, name: str = ""):
        self.name = name
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.is_binary: list[bool] = []
        self.obj: list[float] = []
        self.priority: list[int] = []
        self._names: dict[str, int] = {}
        self._rows_i: list[int] = []
        self._rows_j: list[int] = []
        self._rows_v: list[float] = []
        self.row_lo: list[float] = []
        self.row_hi: list[float] = []

    # -- variables -------------------------------------------------------

    def add_var(self, name: str, lb: float = -math.inf, ub: float = math.inf,
                binary: bool = False, obj: float = 0.0) -> int:
        if name in self._names:
            raise ValueError(f"duplicate variable {name!r}")
        if binary:
            lb, ub = 0.0, 1.0
        idx = len(self.lb)
        self._names[name] = idx
        self.lb.append(lb)
        self.ub.append(ub)
        self.is_binary.append(binary)
        self.obj.append(obj)
        self.priority.append(0)
        return idx

    def var(self, name: str) -> int:
        return self._names[name]

    def has_var(self, name: str) -> bool:
        return name in self._names

    def fix_var(self, idx: int, value: float):
        self.lb[idx] = value
        self.ub[idx] = value

    def set_priority(self, idx: int, priority: int):
        if priority < 0:
            raise ValueError("priorities are non-negative")
        if not self.is_binary[idx]:
            raise ValueError("priorities apply to binary variables only")
        self.priority[idx] = priority

    @property
    def n_vars(self) -> int:
        return len(self.lb)

    @property
    def n_binary(self) -> int:
        return sum(self.is_binary)

    # -- rows --------------------------------------------------------------

    def add_row(self, coeffs: list[tuple[int, float]], lo: float, hi: float):
        """Add ``lo <= sum coef * x <= hi`` (use lo == hi for equalities)."""
        row = len(self.row_lo)
        for j, v in coeffs:
            if v != 0.0:
                self._rows_i.append(row)
                self._rows_j.append(j)
                self._rows_v.append(v)
        self.row_lo.append(lo)
        self.row_hi.append(hi)

    def add_eq(self, coeffs: list[tuple[int, float]], rhs: float):
        self.add_row(coeffs, rhs, rhs)

    def add_le(self, coeffs: list[tuple[int, float]], rhs: float):
        self.add_row(coeffs, -math.inf, rhs)

    def add_ge(self, coeffs: list[tuple[int, float]], rhs: float):
        self.add_row(coeffs, rhs, math.inf)

    @property
    def n_rows(self) -> int:
        return len(self.row_lo)

    def constraint_matrix(self) -> sparse.csc_matrix:
        return sparse.coo_matrix(
            (self._rows_v, (self._rows_i, self._rows_j)),
            shape=(self.n_rows, self.n_vars),
        ).tocsc()


class ScipyHighsBackend:
    """HiGHS via scipy.optimize.milp.

    Deterministic for a fixed problem (single-threaded); branching
    priorities are not supported and fall back to candidate restriction,
    which the report notes.
    """

    name = "scipy-highs"
    supports_priorities = False

    def solve(self, problem: MilpProblem, rel_gap: float = 0.0,
              time_limit: float | None = None, seed: int = 0,
              threads: int = 1) -> tuple[SolveReport, np.ndarray | None]:
        del seed, threads  # single-threaded and deterministic already
        t0 = time.perf_counter()
        integrality = np.array(problem.is_binary, dtype=np.uint8)
        options: dict = {"presolve": True}
        if rel_gap:
            options["mip_rel_gap"] = rel_gap
        if time_limit is not None:
            options["time_limit"] = time_limit
        kwargs = {}
        if problem.n_rows:
            kwargs["constraints"] = LinearConstraint(
                problem.constraint_matrix(),
                np.array(problem.row_lo), np.array(problem.row_hi))
        res = milp(c=np.array(problem.obj),
                   integrality=integrality,
                   bounds=Bounds(np.array(problem.lb), np.array(problem.ub)),
                   **kwargs, options=options)
        wall = time.perf_counter() - t0

        wants_priorities = any(problem.priority)
        note = ""
        if wants_priorities:
            note = "branching priorities unsupported; candidate restriction only"

        x = None if res.x is None else np.asarray(res.x, dtype=float)
        gap = float(res.mip_gap) if getattr(res, "mip_gap", None) is not None else 0.0
        bound = (float(res.mip_dual_bound)
                 if getattr(res, "mip_dual_bound", None) is not None else -math.inf)
        nodes = int(res.mip_node_count or 0) if hasattr(res, "mip_node_count") else 0

        if res.status == 2:
            report = SolveReport("infeasible", math.inf, math.inf, wall,
                                 nodes, 0.0, not wants_priorities, note)
        elif res.status == 1:
            obj = float(res.fun) if res.fun is not None else math.inf
            report = SolveReport("time_limit", obj, bound, wall, nodes, gap,
                                 not wants_priorities, note)
        elif res.status == 0:
            status = "gap_reached" if gap > 1e-9 else "optimal"
            report = SolveReport(status, float(res.fun), bound, wall, nodes,
                                 gap, not wants_priorities, note)
        else:
            report = SolveReport("infeasible", math.inf, math.inf, wall,
                                 nodes, 0.0, not wants_priorities,
                                 note or f"solver status {res.status}: {res.message}")
        return report, x


_DEFAULT_BACKEND: ScipyHighsBackend | None = None


def default_backend() -> ScipyHighsBackend:
    global _DEFAULT_BACKEND
    if _DEFAULT_BACKEND is None:
        _DEFAULT_BACKEND = ScipyHighsBackend()
    return _DEFAULT_BACKEND
