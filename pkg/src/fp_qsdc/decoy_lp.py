"""Decoy-state linear programs bounding the single-photon contribution.

Two small LPs per basis: minimize the signal-class single-photon yield
<Y_1>, and maximize the single-photon error yield <e_1 Y_1>.  Their
variables are photon-number resolved yields per intensity class, sandwiched
between measured gains (with an explicit truncation tail) and coupled across
classes by the trace distances of the corresponding photon-number states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .clickstats import IntervalStats
from .states import CLASS_ORDER, TraceDistanceTable

_CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class LpProblem:
    """min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  0 <= x <= 1."""

    name: str
    c: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    var_names: tuple[str, ...]
    maximize: bool = False

    @property
    def n_vars(self) -> int:
        return self.c.size

    def to_text(self) -> str:
        """Plain-text tableau: objective row, then one constraint per line."""
        lines = [f"# {self.name}",
                 f"# variables: {' '.join(self.var_names)}",
                 ("maximize " if self.maximize else "minimize ")
                 + _row_text(self.c if not self.maximize else -self.c)]
        for row, rhs in zip(self.a_ub, self.b_ub):
            lines.append(f"{_row_text(row)} <= {rhs!r}")
        for row, rhs in zip(self.a_eq, self.b_eq):
            lines.append(f"{_row_text(row)} == {rhs!r}")
        lines.append("0 <= x_j <= 1 for all j")
        return "\n".join(lines) + "\n"


def _row_text(row: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in row)


@dataclass(frozen=True)
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    objective: float
    x: np.ndarray = field(default_factory=lambda: np.empty(0))


def _var_index(class_idx: int, n: int, n_cut: int) -> int:
    return class_idx * (n_cut + 1) + n


def _gain_rows(values, poisson, n_cut, rows, rhs):
    """Gain sandwich: sum_n p_n x_n <= value <= sum_n p_n x_n + tail."""
    n_classes = len(CLASS_ORDER)
    for ci in range(n_classes):
        pn = poisson[ci]
        tail = 1.0 - float(pn.sum())
        row = np.zeros(n_classes * (n_cut + 1))
        row[[_var_index(ci, n, n_cut) for n in range(n_cut + 1)]] = pn
        rows.append(row.copy())
        rhs.append(values[ci])
        rows.append(-row)
        rhs.append(tail - values[ci])


def _coupling_rows(distances, n_from, n_cut, rows, rhs):
    for n in range(n_from, n_cut + 1):
        for a in range(len(CLASS_ORDER)):
            for b in range(a + 1, len(CLASS_ORDER)):
                d = distances.get(n, CLASS_ORDER[a], CLASS_ORDER[b])
                row = np.zeros(len(CLASS_ORDER) * (n_cut + 1))
                row[_var_index(a, n, n_cut)] = 1.0
                row[_var_index(b, n, n_cut)] = -1.0
                rows.append(row.copy())
                rhs.append(d)
                rows.append(-row)
                rhs.append(d)


def _tie_rows(n_values, n_cut):
    rows, rhs = [], []
    for n in n_values:
        for other in (1, 2):  # tie d2 and s to d1
            row = np.zeros(len(CLASS_ORDER) * (n_cut + 1))
            row[_var_index(0, n, n_cut)] = 1.0
            row[_var_index(other, n, n_cut)] = -1.0
            rows.append(row)
            rhs.append(0.0)
    return rows, rhs


def _names(prefix: str, n_cut: int) -> tuple[str, ...]:
    return tuple(f"{prefix}[{c}][{n}]"
                 for c in CLASS_ORDER for n in range(n_cut + 1))


def build_yield_lp(stats: dict[str, IntervalStats],
                   distances: TraceDistanceTable, n_cut: int,
                   basis: str = "?") -> LpProblem:
    """LP for the lower bound on the signal-class single-photon yield.

    Zero- and one-photon yields are tied equal across classes; higher photon
    numbers are coupled through the trace-distance table.
    """
    _check_stats(stats, n_cut)
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    poisson = [stats[c].poisson for c in CLASS_ORDER]
    _gain_rows([stats[c].q_gain for c in CLASS_ORDER], poisson, n_cut, rows, rhs)
    _coupling_rows(distances, 2, n_cut, rows, rhs)
    eq_rows, eq_rhs = _tie_rows((0, 1), n_cut)
    c = np.zeros(len(CLASS_ORDER) * (n_cut + 1))
    c[_var_index(CLASS_ORDER.index("s"), 1, n_cut)] = 1.0
    return LpProblem(
        name=f"yield LP, basis {basis}: minimize <Y_1> of the signal class",
        c=c, a_ub=np.array(rows), b_ub=np.array(rhs),
        a_eq=np.array(eq_rows), b_eq=np.array(eq_rhs),
        var_names=_names("Y", n_cut))


def build_error_lp(stats: dict[str, IntervalStats],
                   distances: TraceDistanceTable, n_cut: int,
                   basis: str = "?") -> LpProblem:
    """LP for the upper bound on the signal-class single-photon error yield.

    Mirrors the yield LP with the error-weighted gains <E Q>; only the vacuum
    term is tied across classes, couplings start at one photon.
    """
    _check_stats(stats, n_cut)
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    poisson = [stats[c].poisson for c in CLASS_ORDER]
    _gain_rows([stats[c].eq_product for c in CLASS_ORDER], poisson, n_cut,
               rows, rhs)
    _coupling_rows(distances, 1, n_cut, rows, rhs)
    eq_rows, eq_rhs = _tie_rows((0,), n_cut)
    c = np.zeros(len(CLASS_ORDER) * (n_cut + 1))
    c[_var_index(CLASS_ORDER.index("s"), 1, n_cut)] = -1.0
    return LpProblem(
        name=f"error LP, basis {basis}: maximize <e_1 Y_1> of the signal class",
        c=c, a_ub=np.array(rows), b_ub=np.array(rhs),
        a_eq=np.array(eq_rows), b_eq=np.array(eq_rhs),
        var_names=_names("eY", n_cut), maximize=True)


def _check_stats(stats: dict[str, IntervalStats], n_cut: int):
    for c in CLASS_ORDER:
        if c not in stats:
            raise ValueError(f"missing interval stats for class {c!r}")
        if stats[c].poisson.size != n_cut + 1:
            raise ValueError(f"stats for class {c!r} truncated at "
                             f"{stats[c].poisson.size - 1}, need n_cut={n_cut}")


def solve_lp(problem: LpProblem) -> LpSolution:
    """Solve with the deterministic dense simplex backend (HiGHS).

    Infeasible or unbounded programs are reported through the status field,
    never raised.
    """
    res = linprog(
        problem.c,
        A_ub=problem.a_ub, b_ub=problem.b_ub,
        A_eq=problem.a_eq if problem.a_eq.size else None,
        b_eq=problem.b_eq if problem.b_eq.size else None,
        bounds=[(0.0, 1.0)] * problem.n_vars,
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10,
                 "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        return LpSolution(status="infeasible", objective=float("nan"))
    if res.status == 3:
        return LpSolution(status="unbounded", objective=float("nan"))
    if not res.success:
        return LpSolution(status="infeasible", objective=float("nan"))
    violation = feasibility_violation(problem, res.x)
    if violation > 100 * _CONSTRAINT_TOL:
        return LpSolution(status="infeasible", objective=float("nan"))
    objective = float(res.fun)
    if problem.maximize:
        objective = -objective
    return LpSolution(status="optimal", objective=objective, x=res.x.copy())


def feasibility_violation(problem: LpProblem, x: np.ndarray) -> float:
    """Worst constraint violation of a candidate point (the LP oracle check)."""
    v = 0.0
    if problem.a_ub.size:
        v = max(v, float(np.max(problem.a_ub @ x - problem.b_ub, initial=0.0)))
    if problem.a_eq.size:
        v = max(v, float(np.max(np.abs(problem.a_eq @ x - problem.b_eq),
                                initial=0.0)))
    v = max(v, float(np.max(-x, initial=0.0)), float(np.max(x - 1.0, initial=0.0)))
    return v


@dataclass(frozen=True)
class SinglePhotonBounds:
    """LP outcome for one basis: guaranteed yield and worst-case error."""

    y1_min: float
    e1y1_max: float
    e1_max: float
    yield_status: str
    error_status: str

    @property
    def usable(self) -> bool:
        return self.yield_status == "optimal" and self.error_status == "optimal"


def single_photon_bounds(stats: dict[str, IntervalStats],
                         union_distances: TraceDistanceTable,
                         state_distances: TraceDistanceTable,
                         n_cut: int, basis: str = "?") -> SinglePhotonBounds:
    """Run both LPs and combine them into the worst-case single-photon error.

    A vanishing yield bound means no single-photon guarantee at all; the
    error rate is then pinned to 1/2 and the capacity pipeline treats those
    photons as fully leaked.
    """
    sol_y = solve_lp(build_yield_lp(stats, union_distances, n_cut, basis))
    sol_e = solve_lp(build_error_lp(stats, state_distances, n_cut, basis))
    if sol_y.status != "optimal" or sol_e.status != "optimal":
        return SinglePhotonBounds(0.0, 0.0, 0.5, sol_y.status, sol_e.status)
    y1 = max(0.0, sol_y.objective)
    e1y1 = max(0.0, sol_e.objective)
    if y1 <= 1e-15:
        e1 = 0.5
    else:
        e1 = min(0.5, max(0.0, e1y1 / y1))
    return SinglePhotonBounds(y1, e1y1, e1, sol_y.status, sol_e.status)
