"""Small dense linear-programming solver.

Bounded-variable primal simplex on a full tableau, two phases (artificial
variables only on rows the all-lower-bounds point violates). Entering and
leaving choices both use Bland's smallest-index rule, which cannot cycle, so
every run terminates; all choices are index-based, so repeated runs on the
same input pivot identically.

Intended for the small, dense problems produced in this package (a few
thousand variables at most). No sparsity, no factorization updates.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = ["LpStatus", "LinearProgram", "LpSolution", "solve_lp"]

FEASIBILITY_TOL = 1e-7
PIVOT_TOL = 1e-9

_MAX_PIVOTS_BASE = 20_000
_RC_REFRESH_PERIOD = 256  # recompute reduced costs from scratch now and then


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """maximize objective @ x subject to constraint_matrix @ x <= constraint_rhs
    and finite box bounds on every variable."""

    objective: np.ndarray
    constraint_matrix: np.ndarray
    constraint_rhs: np.ndarray
    variable_bounds: np.ndarray  # (n, 2) columns: lower, upper

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        A = np.asarray(self.constraint_matrix, dtype=float)
        b = np.asarray(self.constraint_rhs, dtype=float)
        bounds = np.asarray(self.variable_bounds, dtype=float)
        if c.ndim != 1:
            raise ValueError("objective must be 1-D")
        n = c.size
        if A.ndim != 2 or A.shape[1] != n:
            raise ValueError(f"constraint matrix must have {n} columns")
        if b.shape != (A.shape[0],):
            raise ValueError("constraint rhs length must match the row count")
        if bounds.shape != (n, 2):
            raise ValueError("variable_bounds must have shape (n, 2)")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
            raise ValueError("objective, matrix, and rhs must be finite")
        if not np.all(np.isfinite(bounds)):
            raise ValueError("all variable bounds must be finite")
        if np.any(bounds[:, 0] > bounds[:, 1]):
            raise ValueError("lower bounds must not exceed upper bounds")
        self.objective, self.constraint_matrix, self.constraint_rhs = c, A, b
        self.variable_bounds = bounds


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray
    objective_value: float


class _Tableau:
    """Simplex working state over structural + slack (+ artificial) columns."""

    def __init__(self, lp: LinearProgram):
        self.n = lp.objective.size
        self.m = lp.constraint_matrix.shape[0]
        self.lower = np.concatenate([lp.variable_bounds[:, 0], np.zeros(self.m)])
        self.upper = np.concatenate([lp.variable_bounds[:, 1], np.full(self.m, np.inf)])
        self.T = np.hstack([lp.constraint_matrix.copy(), np.eye(self.m)])
        self.basis = np.arange(self.n, self.n + self.m)
        self.at_upper = np.zeros(self.n + self.m, dtype=bool)
        self.x_basic = lp.constraint_rhs - lp.constraint_matrix @ self.lower[: self.n]
        self.num_artificial = 0

    @property
    def total(self) -> int:
        return self.T.shape[1]

    def add_artificials(self, rows: np.ndarray) -> np.ndarray:
        """Give each violated row a basic artificial; slack goes nonbasic at 0.

        The violated rows are negated so the new basis columns form the
        identity (the artificial enters with coefficient +1 after negation)
        and the artificial's starting value is positive.
        """
        count = rows.size
        cols = np.zeros((self.m, count))
        for j, r in enumerate(rows):
            cols[r, j] = -1.0
        self.T = np.hstack([self.T, cols])
        self.T[rows] *= -1.0
        self.lower = np.concatenate([self.lower, np.zeros(count)])
        self.upper = np.concatenate([self.upper, np.full(count, np.inf)])
        self.at_upper = np.concatenate([self.at_upper, np.zeros(count, dtype=bool)])
        art = np.arange(self.n + self.m, self.n + self.m + count)
        self.num_artificial = count
        for j, r in enumerate(rows):
            self.basis[r] = art[j]
            self.x_basic[r] = -self.x_basic[r]
        return art

    def nonbasic_value(self, j: int) -> float:
        return self.upper[j] if self.at_upper[j] else self.lower[j]

    def reduced_costs(self, c_all: np.ndarray) -> np.ndarray:
        return c_all - c_all[self.basis] @ self.T

    def pivot(self, row: int, col: int):
        self.T[row] /= self.T[row, col]
        other = self.T[:, col].copy()
        other[row] = 0.0
        self.T -= np.outer(other, self.T[row])

    def run(self, c_all: np.ndarray, enterable: np.ndarray) -> LpStatus:
        """Iterate to optimality for the given objective."""
        rc = self.reduced_costs(c_all)
        is_basic = np.zeros(self.total, dtype=bool)
        is_basic[self.basis] = True
        max_pivots = _MAX_PIVOTS_BASE + 50 * (self.total + self.m)

        for step in range(max_pivots):
            if step and step % _RC_REFRESH_PERIOD == 0:
                rc = self.reduced_costs(c_all)

            can_increase = (~is_basic) & enterable & (~self.at_upper) & (rc > PIVOT_TOL)
            can_decrease = (~is_basic) & enterable & self.at_upper & (rc < -PIVOT_TOL)
            candidates = np.flatnonzero(can_increase | can_decrease)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            enter = int(candidates[0])
            sigma = 1.0 if can_increase[enter] else -1.0

            move = sigma * self.T[:, enter]
            span = self.upper[enter] - self.lower[enter]

            # How far each basic variable lets us go before hitting a bound.
            room = np.full(self.m, np.inf)
            toward_lower = move > PIVOT_TOL
            toward_upper = move < -PIVOT_TOL
            lo_b = self.lower[self.basis]
            up_b = self.upper[self.basis]
            room[toward_lower] = (self.x_basic[toward_lower] - lo_b[toward_lower]) / move[toward_lower]
            room[toward_upper] = (up_b[toward_upper] - self.x_basic[toward_upper]) / (-move[toward_upper])
            np.clip(room, 0.0, None, out=room)

            min_room = room.min() if self.m else np.inf
            delta = min(span, min_room)
            if not np.isfinite(delta):
                return LpStatus.UNBOUNDED

            if span <= min_room:
                self.at_upper[enter] = not self.at_upper[enter]
                self.x_basic = self.x_basic - move * span
                continue

            blocking = np.flatnonzero(room <= min_room + 1e-12)
            leave_row = int(blocking[np.argmin(self.basis[blocking])])
            leaving = int(self.basis[leave_row])
            leaves_at_upper = bool(move[leave_row] < 0)

            self.x_basic = self.x_basic - move * delta
            entering_value = self.nonbasic_value(enter) + sigma * delta
            self.pivot(leave_row, enter)
            rc = rc - rc[enter] * self.T[leave_row]
            self.basis[leave_row] = enter
            self.x_basic[leave_row] = entering_value
            self.at_upper[leaving] = leaves_at_upper
            is_basic[leaving] = False
            is_basic[enter] = True

        raise RuntimeError("simplex exceeded its pivot budget")


def _drive_out_artificials(tab: _Tableau, art: np.ndarray) -> None:
    """Pivot basic artificials (all at ~0) out wherever a real column allows.

    A row whose real coefficients are all zero is redundant; its artificial
    stays basic at zero and can never move again.
    """
    art_set = {int(a) for a in art}
    for row in range(tab.m):
        if int(tab.basis[row]) not in art_set:
            continue
        is_basic = np.zeros(tab.total, dtype=bool)
        is_basic[tab.basis] = True
        for j in range(tab.n + tab.m):
            if is_basic[j] or abs(tab.T[row, j]) <= PIVOT_TOL:
                continue
            entering_value = tab.nonbasic_value(j)
            tab.pivot(row, j)
            tab.basis[row] = j
            tab.x_basic[row] = entering_value
            break


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve a small dense LP; deterministic for a fixed input.

    Returns an optimal basic feasible solution, or a solution object with
    status INFEASIBLE / UNBOUNDED (x zeroed) when no optimum exists.
    """
    tab = _Tableau(lp)
    n, m = tab.n, tab.m

    violated = np.flatnonzero(tab.x_basic < -1e-11)
    if violated.size:
        art = tab.add_artificials(violated)
        c_phase1 = np.zeros(tab.total)
        c_phase1[art] = -1.0
        status = tab.run(c_phase1, np.ones(tab.total, dtype=bool))
        if status is not LpStatus.OPTIMAL:
            return LpSolution(LpStatus.INFEASIBLE, np.zeros(n), 0.0)
        basic_art = np.isin(tab.basis, art)
        infeasibility = float(tab.x_basic[basic_art].sum()) if basic_art.any() else 0.0
        if infeasibility > FEASIBILITY_TOL:
            return LpSolution(LpStatus.INFEASIBLE, np.zeros(n), 0.0)
        _drive_out_artificials(tab, art)
        tab.upper[art] = 0.0  # pin any leftover artificials at zero

    c_all = np.zeros(tab.total)
    c_all[:n] = lp.objective
    enterable = np.ones(tab.total, dtype=bool)
    if tab.num_artificial:
        enterable[n + m :] = False
    status = tab.run(c_all, enterable)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, np.zeros(n), 0.0)

    x = np.empty(n)
    row_of = {int(var): row for row, var in enumerate(tab.basis)}
    for j in range(n):
        row = row_of.get(j)
        x[j] = tab.x_basic[row] if row is not None else tab.nonbasic_value(j)
    np.clip(x, lp.variable_bounds[:, 0], lp.variable_bounds[:, 1], out=x)
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x))
