"""Bounded-variable primal simplex on dense numpy arrays.

Two phases with artificial variables; nonbasic variables rest at one of
their bounds. Entering variables follow Dantzig's rule until the
objective stalls, then Bland's rule takes over to rule out cycling. All
ties break on the lowest variable index, so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-7
COST_TOL = 1e-7
REFACTOR_EVERY = 120

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None


def solve_lp(c, a, senses, b, lower, upper) -> LpResult:
    """Minimize ``c @ x`` subject to ``a @ x (<=,=,>=) b`` and bounds.

    Infinite bounds are allowed. Returns the structural part of the
    optimum only (slack values are dropped).
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = c.size
    m = b.size
    if m == 0:
        return _solve_unconstrained(c, lower, upper)

    # Equality form: one slack per row.
    slack_lo = np.empty(m)
    slack_hi = np.empty(m)
    for i, s in enumerate(senses):
        if s == "<=":
            slack_lo[i], slack_hi[i] = 0.0, np.inf
        elif s == ">=":
            slack_lo[i], slack_hi[i] = -np.inf, 0.0
        elif s == "=":
            slack_lo[i], slack_hi[i] = 0.0, 0.0
        else:
            raise ValueError(f"unknown sense {s!r}")
    full_a = np.hstack([a, np.eye(m)])
    lo = np.concatenate([np.asarray(lower, dtype=float), slack_lo])
    hi = np.concatenate([np.asarray(upper, dtype=float), slack_hi])
    cost = np.concatenate([c, np.zeros(m)])

    state = _Simplex(full_a, lo, hi)
    if not state.phase_one(b):
        return LpResult(status=INFEASIBLE)
    cost_full = np.concatenate([cost, np.zeros(state.n - cost.size)])
    status = state.run(cost_full)
    if status == UNBOUNDED:
        return LpResult(status=UNBOUNDED)
    x = state.values()
    return LpResult(status=OPTIMAL, x=x[:n].copy(),
                    objective=float(cost_full @ x))


def _solve_unconstrained(c, lower, upper) -> LpResult:
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if (lo > hi + FEAS_TOL).any():
        return LpResult(status=INFEASIBLE)
    rest = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    x = np.where(c > 0, lo, np.where(c < 0, hi, rest))
    if not np.isfinite(x).all():
        return LpResult(status=UNBOUNDED)
    return LpResult(status=OPTIMAL, x=x, objective=float(c @ x))


class _Simplex:
    """Carries the factorized basis across both phases."""

    def __init__(self, a: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        if (lo > hi + FEAS_TOL).any():
            raise ValueError("crossed variable bounds")
        self.a = a
        self.lo = lo
        self.hi = hi
        self.m, self.n = a.shape
        self.basis = np.empty(self.m, dtype=np.int64)
        self.in_basis = np.zeros(self.n, dtype=bool)
        self.x = np.zeros(self.n)
        self.binv = np.eye(self.m)
        self.b = np.zeros(self.m)
        self.artificial_from = self.n  # set by phase_one

    # -- setup ---------------------------------------------------------
    def phase_one(self, b: np.ndarray) -> bool:
        self.b = np.asarray(b, dtype=float)
        lo, hi = self.lo, self.hi
        start = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
        self.x[:] = start
        residual = b - self.a @ self.x

        m = self.m
        art_cols = np.eye(m)
        art_lo = np.where(residual >= 0, 0.0, -np.inf)
        art_hi = np.where(residual >= 0, np.inf, 0.0)
        phase_cost = np.concatenate([np.zeros(self.n),
                                     np.where(residual >= 0, 1.0, -1.0)])
        self.artificial_from = self.n
        self.a = np.hstack([self.a, art_cols])
        self.lo = np.concatenate([lo, art_lo])
        self.hi = np.concatenate([hi, art_hi])
        self.x = np.concatenate([self.x, residual])
        self.in_basis = np.concatenate([self.in_basis, np.ones(m, dtype=bool)])
        self.basis = np.arange(self.n, self.n + m)
        self.n += m
        self.binv = np.eye(m)

        status = self.run(phase_cost)
        if status == UNBOUNDED:  # cannot happen: phase-1 objective >= 0
            return False
        if float(phase_cost @ self.x) > 1e-6:
            return False
        self._retire_artificials()
        return True

    def _retire_artificials(self):
        """Pin artificials to zero and pivot basic ones out when possible."""
        first = self.artificial_from
        self.lo[first:] = 0.0
        self.hi[first:] = 0.0
        self.x[first:] = 0.0
        for row in range(self.m):
            j = self.basis[row]
            if j < first:
                continue
            tableau_row = self.binv[row] @ self.a
            candidates = [k for k in range(first)
                          if not self.in_basis[k] and abs(tableau_row[k]) > 1e-9]
            if candidates:
                self._pivot(candidates[0], row, 0.0, entering_up=True)
            # Otherwise the row is redundant; the artificial stays basic at 0.

    # -- main loop -----------------------------------------------------
    def run(self, cost: np.ndarray, max_iter: int | None = None) -> str:
        if max_iter is None:
            max_iter = 200 * (self.m + self.n + 10)
        stall = 0
        bland = False
        last_obj = float(cost @ self.x)
        for it in range(max_iter):
            if it % REFACTOR_EVERY == REFACTOR_EVERY - 1:
                self._refactorize()
            y = cost[self.basis] @ self.binv
            reduced = cost - y @ self.a
            entering = self._choose_entering(reduced, bland)
            if entering is None:
                return OPTIMAL
            direction_up = self._enters_upward(entering, reduced[entering])
            if not self._step(entering, direction_up):
                return UNBOUNDED
            obj = float(cost @ self.x)
            if obj < last_obj - 1e-12:
                stall = 0
                last_obj = obj
            else:
                stall += 1
                if stall > 2 * (self.m + self.n):
                    bland = True
        raise RuntimeError("simplex iteration limit hit")

    def _choose_entering(self, reduced: np.ndarray, bland: bool) -> int | None:
        lo, hi, x = self.lo, self.hi, self.x
        movable = ~self.in_basis & (hi - lo > 1e-12)
        at_lower = movable & (np.abs(x - lo) <= 1e-9)
        at_upper = movable & (np.abs(x - hi) <= 1e-9)
        free = movable & ~at_lower & ~at_upper
        eligible = ((at_lower & (reduced < -COST_TOL))
                    | (at_upper & (reduced > COST_TOL))
                    | (free & (np.abs(reduced) > COST_TOL)))
        idx = np.flatnonzero(eligible)
        if idx.size == 0:
            return None
        if bland:
            return int(idx[0])
        violation = np.abs(reduced[idx])
        best = violation.max()
        return int(idx[violation >= best - 1e-12][0])

    def _enters_upward(self, j: int, rj: float) -> bool:
        if abs(self.x[j] - self.lo[j]) <= 1e-9:
            return True
        if abs(self.x[j] - self.hi[j]) <= 1e-9:
            return False
        return rj < 0

    def _step(self, entering: int, up: bool) -> bool:
        w = self.binv @ self.a[:, entering]
        sign = 1.0 if up else -1.0
        # Basic variable i moves by -sign * w[i] per unit of entering move.
        limit = np.inf
        leaving_row = -1
        for i in range(self.m):
            rate = -sign * w[i]
            if rate < -FEAS_TOL:
                lo_i = self.lo[self.basis[i]]
                if np.isfinite(lo_i):
                    room = (self.x[self.basis[i]] - lo_i) / -rate
                else:
                    continue
            elif rate > FEAS_TOL:
                hi_i = self.hi[self.basis[i]]
                if np.isfinite(hi_i):
                    room = (hi_i - self.x[self.basis[i]]) / rate
                else:
                    continue
            else:
                continue
            room = max(room, 0.0)
            if room < limit - 1e-12 or (room < limit + 1e-12 and
                                        (leaving_row < 0 or
                                         self.basis[i] < self.basis[leaving_row])):
                limit = room
                leaving_row = i
        span = self.hi[entering] - self.lo[entering]
        if np.isfinite(span) and span < limit - 1e-12:
            # bound flip: the entering variable crosses to its other bound
            self._apply_move(entering, w, sign, span)
            self.x[entering] = self.hi[entering] if up else self.lo[entering]
            return True
        if not np.isfinite(limit):
            return False
        self._pivot(entering, leaving_row, limit, up)
        return True

    def _apply_move(self, entering: int, w: np.ndarray, sign: float, delta: float):
        if delta != 0.0:
            self.x[self.basis] -= sign * delta * w
            self.x[entering] += sign * delta

    def _pivot(self, entering: int, row: int, delta: float, entering_up: bool):
        w = self.binv @ self.a[:, entering]
        sign = 1.0 if entering_up else -1.0
        self._apply_move(entering, w, sign, delta)
        leaving = self.basis[row]
        # Snap the leaving variable onto the bound it hit.
        if np.isfinite(self.lo[leaving]) and np.isfinite(self.hi[leaving]):
            mid = (self.lo[leaving] + self.hi[leaving]) / 2
            self.x[leaving] = self.lo[leaving] if self.x[leaving] <= mid else self.hi[leaving]
        elif np.isfinite(self.lo[leaving]):
            self.x[leaving] = self.lo[leaving]
        elif np.isfinite(self.hi[leaving]):
            self.x[leaving] = self.hi[leaving]
        self.in_basis[leaving] = False
        self.in_basis[entering] = True
        self.basis[row] = entering
        pivot = w[row]
        if abs(pivot) < 1e-11:
            raise RuntimeError("numerically singular pivot")
        self.binv[row] /= pivot
        for i in range(self.m):
            if i != row and w[i] != 0.0:
                self.binv[i] -= w[i] * self.binv[row]

    def _refactorize(self):
        try:
            self.binv = np.linalg.inv(self.a[:, self.basis])
        except np.linalg.LinAlgError:
            pass  # keep the incrementally updated inverse
        self._resync_basics()

    def _resync_basics(self):
        nb = ~self.in_basis
        rhs = self.b - self.a[:, nb] @ self.x[nb]
        self.x[self.basis] = self.binv @ rhs

    def values(self) -> np.ndarray:
        self._refactorize()
        return self.x
