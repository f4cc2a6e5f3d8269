import math
import os
import random
import stat
import sys
import textwrap

import numpy as np
import pytest

from irpsolve.lpfile import parse_lp, parse_solution, write_lp, write_solution
from irpsolve.milp import (BackendUnavailable, MilpModel, MilpResult,
                           MilpStatus, ParseError, check_assignment, solve,
                           solve_external, solve_highs, solve_reference)
from oracles import brute_force_milp

BACKENDS = [solve_reference, solve_highs]


def lp_two_vars() -> MilpModel:
    m = MilpModel(name="lp2")
    m.add_variable("x", lower=0, upper=5, objective=1.0)
    m.add_variable("y", lower=0, upper=5, objective=1.0)
    m.add_constraint("c0", {"x": 1, "y": 1}, ">=", 3)
    return m


def knapsack() -> MilpModel:
    # max 3a + 4b s.t. 2a + 3b <= 3  ==  min -3a - 4b; optimum 4 at b=1
    m = MilpModel(name="knapsack")
    m.add_variable("a", kind="binary", objective=-3.0)
    m.add_variable("b", kind="binary", objective=-4.0)
    m.add_constraint("cap", {"a": 2, "b": 3}, "<=", 3)
    return m


# ---------------------------------------------------------------------------
# basic contracts, both backends


@pytest.mark.parametrize("backend", BACKENDS)
def test_pure_lp(backend):
    res = backend(lp_two_vars())
    assert res.status == MilpStatus.OPTIMAL
    assert res.objective == pytest.approx(3.0)
    assert res.gap <= 1e-9


@pytest.mark.parametrize("backend", BACKENDS)
def test_binary_knapsack(backend):
    res = backend(knapsack())
    assert res.status == MilpStatus.OPTIMAL
    assert res.objective == pytest.approx(-4.0)
    assert res.assignment == {"a": 0.0, "b": 1.0}


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible_model(backend):
    m = MilpModel()
    m.add_variable("x", lower=0, upper=1, objective=1.0)
    m.add_constraint("c", {"x": 1}, ">=", 2)
    res = backend(m)
    assert res.status == MilpStatus.INFEASIBLE
    assert res.assignment is None


def test_warm_start_equal_to_optimum_is_returned():
    m = knapsack()
    m.warm_start = {"a": 0.0, "b": 1.0}
    res = solve(m, gap_limit=0.0, backend="reference")
    assert res.status == MilpStatus.OPTIMAL
    assert res.objective == pytest.approx(-4.0)


def test_infeasible_warm_start_is_discarded():
    m = knapsack()
    m.warm_start = {"a": 1.0, "b": 1.0}  # violates the capacity row
    res = solve(m, backend="reference")
    assert res.objective == pytest.approx(-4.0)


def test_result_never_exceeds_warm_start():
    # A backend stopped at its gap limit must not return worse than the start.
    rng = random.Random(5)
    m = MilpModel(name="warmfloor")
    for i in range(12):
        m.add_variable(f"x{i}", lower=0, upper=3, kind="integer",
                       objective=rng.uniform(-4, 4))
    for r in range(4):
        m.add_constraint(f"c{r}", {f"x{i}": rng.randint(-2, 3) for i in range(12)},
                         "<=", rng.randint(4, 14))
    exact = solve(m, gap_limit=0.0, backend="reference")
    m.warm_start = dict(exact.assignment)
    loose = solve(m, gap_limit=0.5, backend="highs")
    assert loose.objective <= exact.objective + 1e-9


# ---------------------------------------------------------------------------
# brute-force equivalence and determinism


def random_integer_model(rng: random.Random) -> tuple[MilpModel, list, list]:
    m = MilpModel(name="rnd")
    n = rng.randint(1, 12)
    bounds = []
    for i in range(n):
        if rng.random() < 0.6:
            lo, hi = 0, 1
            kind = "binary"
        else:
            lo = rng.randint(-2, 1)
            hi = lo + rng.randint(0, 2)
            kind = "integer"
        m.add_variable(f"x{i}", lower=lo, upper=hi, kind=kind,
                       objective=rng.choice([-3, -1.5, -1, 0, 1, 2.5]))
        bounds.append((lo, hi))
    rows = []
    for r in range(rng.randint(1, 4)):
        coeffs = [rng.randint(-2, 2) for _ in range(n)]
        sense = rng.choice(["<=", ">="])
        rhs = rng.randint(-3, 6)
        m.add_constraint(f"c{r}", list(enumerate(coeffs)), sense, rhs)
        rows.append((coeffs, sense, rhs))
    return m, rows, bounds


@pytest.mark.parametrize("backend", BACKENDS)
def test_matches_brute_force_on_random_models(backend):
    rng = random.Random(99)
    feasible_seen = 0
    for _ in range(120):
        m, rows, bounds = random_integer_model(rng)
        expected = brute_force_milp(m.objective, rows, bounds)
        res = backend(m)
        if expected is None:
            assert res.status == MilpStatus.INFEASIBLE
            continue
        assert res.objective == pytest.approx(expected[0], abs=1e-7)
        ok, why = check_assignment(m, res.assignment)
        assert ok, why
        feasible_seen += 1
    assert feasible_seen > 40


def test_reference_backend_is_deterministic():
    rng = random.Random(31)
    m, _, _ = random_integer_model(rng)
    first = solve_reference(m)
    for _ in range(3):
        res = solve_reference(m)
        assert res.assignment == first.assignment
        assert res.objective == first.objective


def test_reference_bound_is_monotone_and_gap_met():
    rng = random.Random(7)
    for _ in range(12):
        m, rows, bounds = random_integer_model(rng)
        trace = []
        res = solve_reference(m, gap_limit=0.1, trace=trace)
        bounds_seen = [b for _, b, _ in trace]
        assert all(x <= y + 1e-9 for x, y in zip(bounds_seen, bounds_seen[1:]))
        if res.status in (MilpStatus.OPTIMAL, MilpStatus.FEASIBLE):
            assert res.gap <= 0.1 + 1e-9
            assert res.bound <= res.objective + 1e-9


# ---------------------------------------------------------------------------
# LP file format


GOLDEN_LP = textwrap.dedent("""\
    \\ knapsack
    Minimize
     obj: -3 a - 4 b
    Subject To
     cap: 2 a + 3 b <= 3
    Bounds
     0 <= a <= 1
     0 <= b <= 1
    Binaries
     a
     b
    End
    """)


def test_lp_writer_matches_golden_file():
    assert write_lp(knapsack()) == GOLDEN_LP


def test_lp_round_trip_is_identity():
    for model in (knapsack(), lp_two_vars()):
        text = write_lp(model)
        again = parse_lp(text)
        assert write_lp(again) == text
        assert again.variable_names == model.variable_names
        assert again.lower == model.lower
        assert again.upper == model.upper
        assert again.kinds == model.kinds
        assert again.objective == model.objective
        assert [(c, sorted(t), s, r) for c, t, s, r in again.constraints] == \
               [(c, sorted(t), s, r) for c, t, s, r in model.constraints]


def test_lp_round_trip_with_free_and_infinite_bounds():
    m = MilpModel(name="edge")
    m.add_variable("u", lower=-math.inf, upper=math.inf, objective=1.0)
    m.add_variable("v", lower=-3.5, upper=7.25, kind="integer", objective=-2.0)
    m.add_variable("w", lower=2.0, objective=0.5)
    m.add_constraint("r0", {"u": 1, "v": -2, "w": 1}, "=", 4)
    text = write_lp(m)
    again = parse_lp(text)
    assert write_lp(again) == text


def test_solution_file_round_trip():
    text = write_solution({"a": 0.0, "b": 1.0}, objective=-4.0, bound=-4.0)
    assignment, obj, bound = parse_solution(text)
    assert assignment == {"a": 0.0, "b": 1.0}
    assert obj == -4.0 and bound == -4.0


# ---------------------------------------------------------------------------
# external backend


def make_stub_backend(tmp_path, body: str) -> str:
    script = tmp_path / "stub_backend.py"
    script.write_text("#!/usr/bin/env python3\nimport sys\n" + body)
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    return f"{sys.executable} {script}"


def test_external_stub_solves_knapsack(tmp_path):
    # The stub echoes the enumerated optimum of the knapsack model.
    body = textwrap.dedent("""\
        out = sys.argv[2]
        with open(out, "w") as fh:
            fh.write("=obj= -4\\n=bound= -4\\na 0\\nb 1\\n")
    """)
    cmd = make_stub_backend(tmp_path, body)
    res = solve_external(knapsack(), cmd)
    assert res.status == MilpStatus.OPTIMAL
    assert res.objective == pytest.approx(-4.0)
    assert res.assignment == {"a": 0.0, "b": 1.0}


def test_external_stub_can_parse_our_lp(tmp_path):
    # A stub that actually reads the LP file and solves it by enumeration.
    body = textwrap.dedent("""\
        from irpsolve.lpfile import parse_lp, write_solution
        from irpsolve.milp import solve_reference
        model = parse_lp(open(sys.argv[1]).read())
        res = solve_reference(model)
        with open(sys.argv[2], "w") as fh:
            fh.write(write_solution(res.assignment, res.objective, res.bound))
    """)
    cmd = make_stub_backend(tmp_path, body)
    res = solve_external(lp_two_vars(), cmd)
    assert res.objective == pytest.approx(3.0)


def test_missing_executable_raises_and_solve_falls_back(tmp_path, monkeypatch):
    with pytest.raises(BackendUnavailable):
        solve_external(knapsack(), "/nonexistent/solver-binary")
    monkeypatch.setenv("IRP_MILP_BACKEND", "/nonexistent/solver-binary")
    res = solve(knapsack())
    assert res.objective == pytest.approx(-4.0)


def test_garbage_solution_file_raises_parse_error(tmp_path):
    body = 'open(sys.argv[2], "w").write("a 1\\nb 1\\n")\n'  # violates cap
    cmd = make_stub_backend(tmp_path, body)
    with pytest.raises(ParseError):
        solve_external(knapsack(), cmd)
