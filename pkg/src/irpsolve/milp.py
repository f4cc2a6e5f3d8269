"""Mixed-integer linear programs: model container and three backends.

* :func:`solve_reference` is a self-contained exact branch-and-bound over
  the bounded-variable simplex in :mod:`irpsolve.simplex`. Depth-first
  with a best-bound restart every 1000 nodes; branches on the most
  fractional variable (ties to the lowest id) and explores the floor side
  first, so identical models replay identically.
* :func:`solve_highs` hands the model to SciPy's HiGHS interface.
* :func:`solve_external` shells out to a user command via LP text files.

:func:`solve` picks a backend (``IRP_MILP_BACKEND`` selects an external
command) and falls back, never losing a feasible warm start: when the
warm start beats the backend's incumbent, it is returned instead.
"""

from __future__ import annotations

import logging
import math
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import simplex
from .simplex import solve_lp

log = logging.getLogger(__name__)

INT_TOL = 1e-6
FEAS_TOL = 1e-6


class MilpStatus(Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible_within_gap"
    TIME_LIMIT = "time_limit"
    INFEASIBLE = "infeasible"


class BackendUnavailable(RuntimeError):
    """The external solver command cannot be run."""


class ParseError(RuntimeError):
    """The external solver produced output we cannot use."""


def relative_gap(objective: float, bound: float) -> float:
    return (objective - bound) / max(abs(objective), 1.0)


@dataclass
class MilpModel:
    """Variables, linear constraints and an optional warm start."""

    name: str = "model"
    variable_names: list[str] = field(default_factory=list)
    lower: list[float] = field(default_factory=list)
    upper: list[float] = field(default_factory=list)
    kinds: list[str] = field(default_factory=list)   # continuous|integer|binary
    objective: list[float] = field(default_factory=list)
    constraints: list[tuple[str, list[tuple[int, float]], str, float]] = \
        field(default_factory=list)
    warm_start: dict[str, float] | None = None
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def add_variable(self, name: str, *, lower: float = 0.0,
                     upper: float = math.inf, kind: str = "continuous",
                     objective: float = 0.0) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        if kind not in ("continuous", "integer", "binary"):
            raise ValueError(f"unknown kind {kind!r}")
        if kind == "binary":
            lower, upper = max(lower, 0.0), min(upper, 1.0)
        if lower > upper:
            raise ValueError(f"variable {name!r} has crossed bounds")
        idx = len(self.variable_names)
        self._index[name] = idx
        self.variable_names.append(name)
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.kinds.append(kind)
        self.objective.append(float(objective))
        return idx

    def add_constraint(self, name: str, coeffs, sense: str, rhs: float) -> None:
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"unknown sense {sense!r}")
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        resolved = []
        for var, coef in items:
            idx = var if isinstance(var, int) else self._index.get(var)
            if idx is None or not 0 <= idx < len(self.variable_names):
                raise ValueError(f"constraint {name!r} references unknown variable {var!r}")
            if coef:
                resolved.append((idx, float(coef)))
        self.constraints.append((name, resolved, sense, float(rhs)))

    def index_of(self, name: str) -> int:
        return self._index[name]

    @property
    def n_variables(self) -> int:
        return len(self.variable_names)

    def integer_indices(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k != "continuous"]

    def objective_value(self, assignment: dict[str, float]) -> float:
        return sum(self.objective[self._index[n]] * v for n, v in assignment.items())

    def dense(self):
        """(c, A, senses, b, lo, hi) with A dense; for the reference backend."""
        n = self.n_variables
        a = np.zeros((len(self.constraints), n))
        b = np.empty(len(self.constraints))
        senses = []
        for row, (_, coeffs, sense, rhs) in enumerate(self.constraints):
            for idx, coef in coeffs:
                a[row, idx] += coef
            senses.append(sense)
            b[row] = rhs
        return (np.array(self.objective), a, senses, b,
                np.array(self.lower), np.array(self.upper))


@dataclass
class MilpResult:
    status: MilpStatus
    assignment: dict[str, float] | None
    objective: float | None
    bound: float
    gap: float

    @property
    def feasible(self) -> bool:
        return self.assignment is not None


def check_assignment(model: MilpModel, assignment: dict[str, float],
                     tol: float = FEAS_TOL) -> tuple[bool, str]:
    """Bounds, integrality and every constraint, to tolerance."""
    values = np.zeros(model.n_variables)
    for name, v in assignment.items():
        if name not in model._index:
            return False, f"unknown variable {name!r}"
        values[model._index[name]] = v
    for i, name in enumerate(model.variable_names):
        if values[i] < model.lower[i] - tol or values[i] > model.upper[i] + tol:
            return False, f"{name} violates its bounds"
        if model.kinds[i] != "continuous" and abs(values[i] - round(values[i])) > INT_TOL:
            return False, f"{name} is not integral"
    for cname, coeffs, sense, rhs in model.constraints:
        lhs = sum(values[i] * c for i, c in coeffs)
        if sense == "<=" and lhs > rhs + tol:
            return False, f"{cname} violated"
        if sense == ">=" and lhs < rhs - tol:
            return False, f"{cname} violated"
        if sense == "=" and abs(lhs - rhs) > tol:
            return False, f"{cname} violated"
    return True, ""


def _full_assignment(model: MilpModel, x: np.ndarray) -> dict[str, float]:
    out = {}
    for i, name in enumerate(model.variable_names):
        v = float(x[i])
        if model.kinds[i] != "continuous":
            v = float(round(v))
        out[name] = v
    return out


def _usable_warm_start(model: MilpModel) -> tuple[dict[str, float], float] | None:
    if model.warm_start is None:
        return None
    full = {n: 0.0 for n in model.variable_names} | dict(model.warm_start)
    ok, why = check_assignment(model, full)
    if not ok:
        log.info("warm start for %s discarded: %s", model.name, why)
        return None
    return full, model.objective_value(full)


# ---------------------------------------------------------------------------
# Reference branch and bound


def solve_reference(model: MilpModel, gap_limit: float = 0.0,
                    time_limit: float | None = None,
                    node_limit: int | None = None,
                    trace: list | None = None) -> MilpResult:
    """Exact branch-and-bound over the built-in simplex."""
    c, a, senses, b, lo, hi = model.dense()
    int_idx = model.integer_indices()
    started = time.monotonic()

    incumbent: dict[str, float] | None = None
    incumbent_obj = math.inf
    warm = _usable_warm_start(model)
    if warm:
        incumbent, incumbent_obj = warm

    # Nodes carry bound overrides plus the parent's LP value as a bound.
    root = ({}, -math.inf)
    stack = [root]
    open_bounds: list[float] = [-math.inf]
    processed = 0
    best_bound = -math.inf

    def current_gap() -> float:
        if incumbent is None:
            return math.inf
        return relative_gap(incumbent_obj, best_bound)

    def finish(status: MilpStatus) -> MilpResult:
        bound = min(best_bound, incumbent_obj) if incumbent else best_bound
        return MilpResult(status=status, assignment=incumbent,
                          objective=incumbent_obj if incumbent else None,
                          bound=bound, gap=current_gap())

    while stack:
        pending = [bd for _, bd in stack]
        best_bound = min(pending) if incumbent is None else min(pending + [incumbent_obj])
        if incumbent is not None and current_gap() <= gap_limit + 1e-12:
            status = MilpStatus.OPTIMAL if current_gap() <= 1e-9 else MilpStatus.FEASIBLE
            return finish(status)
        if time_limit is not None and time.monotonic() - started > time_limit:
            return finish(MilpStatus.TIME_LIMIT if incumbent else MilpStatus.INFEASIBLE)
        if node_limit is not None and processed >= node_limit:
            return finish(MilpStatus.TIME_LIMIT if incumbent else MilpStatus.INFEASIBLE)

        processed += 1
        if processed % 1000 == 0:
            pick = min(range(len(stack)), key=lambda i: stack[i][1])
            node = stack.pop(pick)
        else:
            node = stack.pop()
        overrides, node_bound = node
        if incumbent is not None and node_bound >= incumbent_obj - 1e-9:
            continue

        nlo, nhi = lo.copy(), hi.copy()
        for var, (l2, h2) in overrides.items():
            nlo[var], nhi[var] = l2, h2
        if (nlo > nhi).any():
            continue
        lp = solve_lp(c, a, senses, b, nlo, nhi)
        if lp.status != simplex.OPTIMAL:
            continue
        lp_obj = lp.objective
        if trace is not None:
            trace.append((processed, best_bound, incumbent_obj if incumbent else None))
        if incumbent is not None and lp_obj >= incumbent_obj - 1e-9:
            continue

        frac_var = -1
        frac_dist = -1.0
        for i in int_idx:
            f = lp.x[i] - math.floor(lp.x[i])
            dist = min(f, 1.0 - f)
            if dist > INT_TOL and dist > frac_dist + 1e-12:
                frac_dist = dist
                frac_var = i
        if frac_var < 0:
            cand = _full_assignment(model, lp.x)
            ok, why = check_assignment(model, cand)
            if ok:
                obj = model.objective_value(cand)
                if obj < incumbent_obj - 1e-9:
                    incumbent, incumbent_obj = cand, obj
            else:  # rounding pushed it out; split on the first integer var
                log.debug("rounded LP point rejected: %s", why)
            continue

        value = lp.x[frac_var]
        down = dict(overrides)
        down[frac_var] = (nlo[frac_var], math.floor(value))
        up = dict(overrides)
        up[frac_var] = (math.ceil(value), nhi[frac_var])
        stack.append((up, lp_obj))
        stack.append((down, lp_obj))  # depth-first, floor side first

    best_bound = incumbent_obj if incumbent else math.inf
    if incumbent is None:
        return MilpResult(status=MilpStatus.INFEASIBLE, assignment=None,
                          objective=None, bound=math.inf, gap=math.inf)
    return MilpResult(status=MilpStatus.OPTIMAL, assignment=incumbent,
                      objective=incumbent_obj, bound=incumbent_obj, gap=0.0)


# ---------------------------------------------------------------------------
# HiGHS backend (scipy)


def solve_highs(model: MilpModel, gap_limit: float = 0.0,
                time_limit: float | None = None) -> MilpResult:
    from scipy import sparse
    from scipy.optimize import Bounds, LinearConstraint, milp

    n = model.n_variables
    c = np.array(model.objective)
    integrality = np.array([0 if k == "continuous" else 1 for k in model.kinds])
    lo = np.array(model.lower)
    hi = np.array(model.upper)

    rows, cols, vals = [], [], []
    con_lo = np.empty(len(model.constraints))
    con_hi = np.empty(len(model.constraints))
    for r, (_, coeffs, sense, rhs) in enumerate(model.constraints):
        for idx, coef in coeffs:
            rows.append(r)
            cols.append(idx)
            vals.append(coef)
        con_lo[r] = rhs if sense in (">=", "=") else -np.inf
        con_hi[r] = rhs if sense in ("<=", "=") else np.inf

    options = {"mip_rel_gap": max(gap_limit, 0.0)}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    constraints = None
    if model.constraints:
        a = sparse.csr_matrix((vals, (rows, cols)),
                              shape=(len(model.constraints), n))
        constraints = LinearConstraint(a, con_lo, con_hi)
    res = milp(c=c, constraints=constraints, integrality=integrality,
               bounds=Bounds(lo, hi), options=options)

    if res.status == 2:
        return MilpResult(status=MilpStatus.INFEASIBLE, assignment=None,
                          objective=None, bound=math.inf, gap=math.inf)
    if res.x is None:
        return MilpResult(status=MilpStatus.TIME_LIMIT, assignment=None,
                          objective=None, bound=-math.inf, gap=math.inf)
    assignment = _full_assignment(model, res.x)
    ok, why = check_assignment(model, assignment)
    if not ok:
        raise ParseError(f"HiGHS returned an unusable point: {why}")
    objective = model.objective_value(assignment)
    bound = res.mip_dual_bound if res.mip_dual_bound is not None else objective
    if integrality.sum() == 0:
        bound = objective  # LP optimum is exact
    gap = relative_gap(objective, bound)
    if gap <= 1e-9:
        status = MilpStatus.OPTIMAL
    elif gap <= gap_limit + 1e-12:
        status = MilpStatus.FEASIBLE
    else:
        status = MilpStatus.TIME_LIMIT
    return MilpResult(status=status, assignment=assignment,
                      objective=objective, bound=bound, gap=gap)


# ---------------------------------------------------------------------------
# External backend bridge


def solve_external(model: MilpModel, backend_command: str,
                   gap_limit: float = 0.0,
                   time_limit: float | None = None) -> MilpResult:
    """Run ``backend_command <model.lp> <out.sol>`` and parse the result.

    The command receives the model in LP text format and must write a
    solution file of ``name value`` lines (``=obj=`` / ``=bound=`` lines
    optional). Unknown or unusable output raises :class:`ParseError`;
    a command that cannot be started raises :class:`BackendUnavailable`.
    """
    from .lpfile import LpSyntaxError, parse_solution, write_lp

    argv = shlex.split(backend_command)
    if not argv:
        raise BackendUnavailable("empty backend command")
    with tempfile.TemporaryDirectory(prefix="irpmilp") as tmp:
        lp_path = os.path.join(tmp, "model.lp")
        sol_path = os.path.join(tmp, "model.sol")
        with open(lp_path, "w") as fh:
            fh.write(write_lp(model))
        try:
            proc = subprocess.run(argv + [lp_path, sol_path],
                                  capture_output=True, text=True,
                                  timeout=None if time_limit is None
                                  else max(time_limit * 3, 60))
        except FileNotFoundError as err:
            raise BackendUnavailable(f"cannot run {argv[0]!r}: {err}") from err
        except subprocess.TimeoutExpired as err:
            raise BackendUnavailable(f"backend timed out: {err}") from err
        if proc.returncode != 0:
            raise BackendUnavailable(
                f"backend exited with {proc.returncode}: {proc.stderr.strip()[:500]}")
        try:
            with open(sol_path) as fh:
                assignment, objective, bound = parse_solution(fh.read())
        except FileNotFoundError as err:
            raise ParseError("backend wrote no solution file") from err
        except LpSyntaxError as err:
            raise ParseError(str(err)) from err
    full = {n: 0.0 for n in model.variable_names}
    for name, value in assignment.items():
        if name not in full:
            raise ParseError(f"solution mentions unknown variable {name!r}")
        full[name] = value
    for name, idx in model._index.items():
        if model.kinds[idx] != "continuous":
            full[name] = float(round(full[name]))
    ok, why = check_assignment(model, full)
    if not ok:
        raise ParseError(f"backend solution infeasible: {why}")
    objective = model.objective_value(full)
    bound = objective if bound is None else bound
    gap = relative_gap(objective, bound)
    status = MilpStatus.OPTIMAL if gap <= 1e-9 else MilpStatus.FEASIBLE
    return MilpResult(status=status, assignment=full, objective=objective,
                      bound=bound, gap=gap)


# ---------------------------------------------------------------------------
# Front door

ENV_BACKEND = "IRP_MILP_BACKEND"


def solve(model: MilpModel, gap_limit: float = 0.0,
          time_limit: float | None = None,
          backend: str | None = None) -> MilpResult:
    """Solve with the selected backend, warm start never lost.

    ``backend`` is ``"highs"``, ``"reference"``, ``"external:<command>"``
    or None, in which case the :data:`ENV_BACKEND` environment variable
    (external command) is honoured and HiGHS is the default. External and
    HiGHS failures fall back on the next backend in line.
    """
    if backend is None:
        env = os.environ.get(ENV_BACKEND, "").strip()
        backend = f"external:{env}" if env else "highs"

    result: MilpResult | None = None
    if backend.startswith("external:"):
        try:
            result = solve_external(model, backend.split(":", 1)[1],
                                    gap_limit, time_limit)
        except (BackendUnavailable, ParseError) as err:
            log.warning("external MILP backend failed (%s); falling back", err)
            backend = "highs"
    if result is None and backend == "highs":
        try:
            result = solve_highs(model, gap_limit, time_limit)
        except (ImportError, ParseError) as err:
            log.warning("HiGHS backend failed (%s); using reference solver", err)
            backend = "reference"
    if result is None:
        result = solve_reference(model, gap_limit, time_limit)

    warm = _usable_warm_start(model)
    if warm is not None:
        warm_assignment, warm_obj = warm
        if result.objective is None or result.objective > warm_obj + 1e-9:
            if result.status == MilpStatus.INFEASIBLE:
                raise RuntimeError(
                    f"{model.name}: backend reported infeasible but the warm start is feasible")
            bound = min(result.bound, warm_obj)
            gap = relative_gap(warm_obj, bound)
            status = MilpStatus.OPTIMAL if gap <= 1e-9 else (
                MilpStatus.FEASIBLE if gap <= gap_limit + 1e-12 else result.status)
            result = MilpResult(status=status, assignment=warm_assignment,
                                objective=warm_obj, bound=bound, gap=gap)
    return result
