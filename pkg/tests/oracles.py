"""Independent brute-force oracles used to pin expected values.

Everything here is written directly from the problem definitions with plain
Python data structures, deliberately avoiding the package's evaluators and
solvers, so tests can compare the two sides.
"""

from __future__ import annotations

import itertools
import math

from irpsolve.model import Instance, Route, make_route


# ---------------------------------------------------------------------------
# Cost simulation (independent of irpsolve.model.evaluate)


def oracle_cost(inst: Instance, routes) -> float:
    """Day-by-day simulation of the inventory dynamics and all six costs."""
    nd = inst.n_depots
    depot_stock = {(m, d): int(inst.initial_inventory[m, d])
                   for m in range(inst.n_commodities) for d in range(nd)}
    cust_stock = {(m, c): int(inst.initial_inventory[m, nd + c])
                  for m in range(inst.n_commodities) for c in range(inst.n_customers)}
    sent: dict[tuple[int, int, int], int] = {}
    received: dict[tuple[int, int, int], int] = {}
    routing = 0.0
    for r in routes:
        km = sum(float(inst.distance[u, v]) for u, v in zip(r.path, r.path[1:]))
        routing += inst.cost_vehicle + inst.cost_stop * r.n_stops + inst.cost_km * km
        for s, c in enumerate(r.stops):
            for m, q in enumerate(r.quantities[s]):
                if q:
                    sent[(m, r.depot, r.day)] = sent.get((m, r.depot, r.day), 0) + q
                    key = (m, inst.cidx(c), r.arrivals[s])
                    received[key] = received.get(key, 0) + q

    total = routing
    for day in range(1, inst.horizon + 1):
        for (m, d), stock in list(depot_stock.items()):
            stock += int(inst.release[m, d, day]) - sent.get((m, d, day), 0)
            if stock < 0:
                raise ValueError(f"depot {d} oversells commodity {m} on day {day}")
            depot_stock[(m, d)] = stock
            over = stock - int(inst.capacity[m, d, day])
            if over > 0:
                total += over * float(inst.excess_cost[m, d])
        for (m, c), stock in list(cust_stock.items()):
            need = int(inst.demand[m, c, day])
            if need > stock:
                total += (need - stock) * float(inst.shortage_cost[m, c])
                stock = 0
            else:
                stock -= need
            stock += received.get((m, c, day), 0)
            cust_stock[(m, c)] = stock
            over = stock - int(inst.capacity[m, nd + c, day])
            if over > 0:
                total += over * float(inst.excess_cost[m, nd + c])
    return total


# ---------------------------------------------------------------------------
# Exhaustive route enumeration


def all_paths(inst: Instance, max_stops: int | None = None):
    """Every admissible path (elementary, depot-rooted, stop count capped)."""
    cap = inst.s_max if max_stops is None else min(max_stops, inst.s_max)
    customers = list(range(inst.n_depots, inst.n_vertices))
    paths = []
    for d in range(inst.n_depots):
        for k in range(1, cap + 1):
            for combo in itertools.permutations(customers, k):
                paths.append((d, *combo))
    return paths


def _stop_quantity_options(inst: Instance, c: int, qty_cap):
    """Per-stop quantity vectors bounded by the per-(m, c) caps."""
    ranges = []
    for m in range(inst.n_commodities):
        cap = qty_cap.get((m, c), 0)
        ranges.append(range(cap + 1))
    return [tuple(v) for v in itertools.product(*ranges)]


def candidate_routes(inst: Instance, max_stops: int | None = None):
    """All loaded routes worth enumerating.

    Deliveries are capped by each customer's total demand of the commodity
    (sending more never lowers the cost) and all-zero loadings are skipped
    (removing an empty vehicle always helps).
    """
    qty_cap = {}
    for m in range(inst.n_commodities):
        for c in range(inst.n_customers):
            v = inst.n_depots + c
            if inst.uses[m, v]:
                qty_cap[(m, v)] = int(inst.demand[m, c, 1:].sum())
    routes = []
    for path in all_paths(inst, max_stops):
        per_stop = [_stop_quantity_options(inst, c, qty_cap) for c in path[1:]]
        for day in range(1, inst.horizon + 1):
            for qty in itertools.product(*per_stop):
                if not any(q for stop in qty for q in stop):
                    continue
                try:
                    routes.append(make_route(inst, day, path, qty))
                except ValueError:
                    continue
    return routes


def optimal_route_set(inst: Instance, max_vehicles: int,
                      cost_fn=oracle_cost) -> tuple[float, tuple[Route, ...]]:
    """Exact optimum over all route multisets of at most ``max_vehicles``."""
    best_cost = cost_fn(inst, [])
    best: tuple[Route, ...] = ()
    candidates = candidate_routes(inst)
    for k in range(1, max_vehicles + 1):
        for combo in itertools.combinations_with_replacement(candidates, k):
            try:
                cost = cost_fn(inst, combo)
            except ValueError:
                continue
            if cost < best_cost - 1e-9:
                best_cost = cost
                best = combo
    return best_cost, best


# ---------------------------------------------------------------------------
# Bin packing


def optimal_bin_count(lengths, capacity) -> int:
    """Minimal number of bins by depth-first search (use for <= 10 items)."""
    items = sorted(lengths, reverse=True)
    if any(x > capacity for x in items):
        raise ValueError("item larger than capacity")
    best = len(items)

    def place(i, bins):
        nonlocal best
        if len(bins) >= best:
            return
        if i == len(items):
            best = len(bins)
            return
        seen = set()
        for b in range(len(bins)):
            space = bins[b]
            if items[i] <= space and space not in seen:
                seen.add(space)
                bins[b] -= items[i]
                place(i + 1, bins)
                bins[b] += items[i]
        bins.append(capacity - items[i])
        place(i + 1, bins)
        bins.pop()

    place(0, [])
    return best


# ---------------------------------------------------------------------------
# Network flows


def brute_force_circulation(arcs, n_vertices) -> tuple[float, list[int]] | None:
    """Cheapest integral circulation by pruned enumeration.

    ``arcs`` is a list of ``(tail, head, lower, upper, cost)``. Returns
    ``(cost, flows)`` or None when infeasible. Meant for tiny networks.
    """
    n = len(arcs)
    out_arcs = [[] for _ in range(n_vertices)]
    in_arcs = [[] for _ in range(n_vertices)]
    for i, (u, v, *_rest) in enumerate(arcs):
        out_arcs[u].append(i)
        in_arcs[v].append(i)
    best: list[float | None] = [None]
    best_flow = [None]
    flows = [0] * n

    def vertex_balanced(v) -> bool:
        return (sum(flows[i] for i in in_arcs[v])
                == sum(flows[i] for i in out_arcs[v]))

    # Assign arcs in order; once every arc at a vertex is fixed, check it.
    last_arc_at = [max((i for i in out_arcs[v] + in_arcs[v]), default=-1)
                   for v in range(n_vertices)]
    check_after = [[] for _ in range(n)]
    for v in range(n_vertices):
        if last_arc_at[v] >= 0:
            check_after[last_arc_at[v]].append(v)

    # Cheapest conceivable contribution of the still-unassigned arcs, so
    # pruning stays valid when some costs are negative.
    suffix_min = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        _u, _v, lo, hi, c = arcs[i]
        suffix_min[i] = suffix_min[i + 1] + min(lo * c, hi * c)

    def assign(i, cost):
        if best[0] is not None and cost + suffix_min[i] >= best[0] - 1e-12:
            return
        if i == n:
            best[0] = cost
            best_flow[0] = flows[:]
            return
        _u, _v, lo, hi, c = arcs[i]
        for f in range(lo, hi + 1):
            flows[i] = f
            if all(vertex_balanced(v) for v in check_after[i]):
                assign(i + 1, cost + f * c)
        flows[i] = 0

    assign(0, 0.0)
    if best[0] is None:
        return None
    return best[0], best_flow[0]


def linprog_circulation_cost(arcs, n_vertices) -> float | None:
    """Circulation optimum via scipy's LP solver (network matrices are
    integral, so the LP value equals the integer optimum)."""
    import numpy as np
    from scipy.optimize import linprog

    n = len(arcs)
    a_eq = np.zeros((n_vertices, n))
    for k, (u, v, *_rest) in enumerate(arcs):
        a_eq[u, k] -= 1.0
        a_eq[v, k] += 1.0
    c = np.array([a[4] for a in arcs], dtype=float)
    bounds = [(a[2], a[3]) for a in arcs]
    res = linprog(c, A_eq=a_eq, b_eq=np.zeros(n_vertices), bounds=bounds,
                  method="highs")
    if not res.success:
        return None
    return float(res.fun)


# ---------------------------------------------------------------------------
# Integer programs


def brute_force_milp(c, constraints, bounds) -> tuple[float, tuple[int, ...]] | None:
    """Exact minimum of an all-integer program by enumeration.

    ``constraints`` holds ``(coeffs, sense, rhs)`` rows with dense coeffs,
    sense in {"<=", "=", ">="}. Returns ``(objective, x)`` or None.
    """
    best = None
    best_x = None
    ranges = [range(lo, hi + 1) for lo, hi in bounds]
    for x in itertools.product(*ranges):
        ok = True
        for coeffs, sense, rhs in constraints:
            lhs = sum(a * v for a, v in zip(coeffs, x))
            if sense == "<=" and lhs > rhs + 1e-9:
                ok = False
            elif sense == ">=" and lhs < rhs - 1e-9:
                ok = False
            elif sense == "=" and abs(lhs - rhs) > 1e-9:
                ok = False
            if not ok:
                break
        if not ok:
            continue
        obj = sum(a * v for a, v in zip(c, x))
        if best is None or obj < best - 1e-12:
            best = obj
            best_x = x
    if best is None:
        return None
    return best, best_x
