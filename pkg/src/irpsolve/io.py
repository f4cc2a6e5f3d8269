"""Instance and solution files, the seeded instance generator, and reports.

Instances and solutions are stored as JSON documents with explicit units
(kilometers, hours, days, integer load units, euros). Loading a saved
instance reproduces it bit for bit. Schema violations raise
:class:`FormatError` carrying the JSON path of the offending entry.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .model import (COST_TOL, Instance, Route, Solution, evaluate, make_route)

INSTANCE_FORMAT = "irp-instance"
SOLUTION_FORMAT = "irp-solution"
FORMAT_VERSION = 1

UNITS = {
    "distance": "km",
    "duration": "hours",
    "time": "days",
    "quantity": "integer load units",
    "money": "EUR",
}


class FormatError(ValueError):
    """A document does not match the expected schema."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# Instance documents


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise FormatError(path, f"missing required field '{key}'")
    return doc[key]


def _day_map(value, horizon: int, path: str) -> dict[int, int]:
    """Parse a {day: units} mapping with days in 1..horizon."""
    if not isinstance(value, dict):
        raise FormatError(path, "expected a {day: units} mapping")
    out = {}
    for key, qty in value.items():
        try:
            day = int(key)
        except (TypeError, ValueError):
            raise FormatError(f"{path}.{key}", "day keys must be integers") from None
        if not 1 <= day <= horizon:
            raise FormatError(f"{path}.{key}", f"day outside 1..{horizon}")
        if not isinstance(qty, int) or qty < 0:
            raise FormatError(f"{path}.{key}", "units must be nonnegative integers")
        out[day] = qty
    return out


def instance_from_dict(doc: dict) -> Instance:
    """Build and validate an :class:`~irpsolve.model.Instance` from a document."""
    if doc.get("format") != INSTANCE_FORMAT:
        raise FormatError("format", f"expected '{INSTANCE_FORMAT}'")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError("version", f"expected {FORMAT_VERSION}")
    horizon = _require(doc, "horizon", "")
    if not isinstance(horizon, int) or horizon < 1:
        raise FormatError("horizon", "must be a positive integer")

    comm_docs = _require(doc, "commodities", "")
    commodities = tuple(c["id"] for c in comm_docs)
    if len(set(commodities)) != len(commodities):
        raise FormatError("commodities", "duplicate commodity ids")
    lengths = np.array([int(c["length"]) for c in comm_docs], dtype=np.int64)
    m_index = {mid: i for i, mid in enumerate(commodities)}

    depot_docs = _require(doc, "depots", "")
    customer_docs = _require(doc, "customers", "")
    depots = tuple(d["id"] for d in depot_docs)
    customers = tuple(c["id"] for c in customer_docs)
    names = depots + customers
    if len(set(names)) != len(names):
        raise FormatError("depots/customers", "duplicate site ids")
    v_index = {vid: i for i, vid in enumerate(names)}
    nm, nd, nc = len(commodities), len(depots), len(customers)
    nv = nd + nc

    initial = np.zeros((nm, nv), dtype=np.int64)
    release = np.zeros((nm, nd, horizon + 1), dtype=np.int64)
    demand = np.zeros((nm, nc, horizon + 1), dtype=np.int64)
    capacity = np.zeros((nm, nv, horizon + 1), dtype=np.int64)
    excess_cost = np.zeros((nm, nv), dtype=np.float64)
    shortage_cost = np.zeros((nm, nc), dtype=np.float64)

    def commodity_of(key: str, path: str) -> int:
        if key not in m_index:
            raise FormatError(path, f"unknown commodity '{key}'")
        return m_index[key]

    def fill_site(site: dict, v: int, path: str, is_depot: bool):
        for mid, qty in site.get("initial", {}).items():
            initial[commodity_of(mid, f"{path}.initial"), v] = int(qty)
        for mid, per_day in site.get("capacity", {}).items():
            mi = commodity_of(mid, f"{path}.capacity")
            if isinstance(per_day, dict):
                for day, cap in _day_map(per_day, horizon, f"{path}.capacity.{mid}").items():
                    capacity[mi, v, day] = cap
            else:
                capacity[mi, v, 1:] = int(per_day)
        for mid, cost in site.get("excess_cost", {}).items():
            excess_cost[commodity_of(mid, f"{path}.excess_cost"), v] = float(cost)
        if is_depot:
            for mid, per_day in site.get("release", {}).items():
                mi = commodity_of(mid, f"{path}.release")
                for day, qty in _day_map(per_day, horizon, f"{path}.release.{mid}").items():
                    release[mi, v, day] = qty
        else:
            c = v - nd
            for mid, per_day in site.get("demand", {}).items():
                mi = commodity_of(mid, f"{path}.demand")
                for day, qty in _day_map(per_day, horizon, f"{path}.demand.{mid}").items():
                    demand[mi, c, day] = qty
            for mid, cost in site.get("shortage_cost", {}).items():
                shortage_cost[commodity_of(mid, f"{path}.shortage_cost"), c] = float(cost)

    for i, d in enumerate(depot_docs):
        fill_site(d, i, f"depots[{i}]", True)
    for i, c in enumerate(customer_docs):
        fill_site(c, nd + i, f"customers[{i}]", False)

    distance = np.full((nv, nv), np.inf)
    duration = np.full((nv, nv), np.inf)
    np.fill_diagonal(distance, 0.0)
    np.fill_diagonal(duration, 0.0)
    arcs = _require(doc, "arcs", "")
    for uid, heads in arcs.items():
        if uid not in v_index:
            raise FormatError(f"arcs.{uid}", "unknown site id")
        u = v_index[uid]
        for vid, data in heads.items():
            if vid not in v_index:
                raise FormatError(f"arcs.{uid}.{vid}", "unknown site id")
            v = v_index[vid]
            if v < nd:
                raise FormatError(f"arcs.{uid}.{vid}", "arcs can only point at customers")
            if u == v:
                raise FormatError(f"arcs.{uid}.{vid}", "self arcs are not allowed")
            distance[u, v] = float(data["km"])
            duration[u, v] = float(data["hours"])
    for u in range(nv):
        for v in range(nd, nv):
            if u != v and not math.isfinite(distance[u, v]):
                raise FormatError(
                    "arcs", f"missing arc {names[u]} -> {names[v]}")

    costs = _require(doc, "costs", "")
    inst = Instance(
        commodities=commodities,
        depots=depots,
        customers=customers,
        horizon=horizon,
        lengths=lengths,
        vehicle_length=int(_require(doc, "vehicle_length", "")),
        initial_inventory=initial,
        release=release,
        demand=demand,
        capacity=capacity,
        excess_cost=excess_cost,
        shortage_cost=shortage_cost,
        cost_vehicle=float(_require(costs, "vehicle", "costs")),
        cost_stop=float(_require(costs, "stop", "costs")),
        cost_km=float(_require(costs, "km", "costs")),
        distance=distance,
        duration=duration,
        s_max=int(_require(doc, "s_max", "")),
        tau_max=float(_require(doc, "tau_max", "")),
    )
    return inst.validate()


def instance_to_dict(inst: Instance) -> dict:
    """Serialize an instance; ``instance_from_dict`` restores it exactly."""
    nd = inst.n_depots

    def site_doc(v: int) -> dict:
        doc: dict[str, Any] = {"id": inst.vertex_name(v)}
        initial = {inst.commodities[m]: int(q)
                   for m, q in enumerate(inst.initial_inventory[:, v]) if q}
        if initial:
            doc["initial"] = initial
        caps = {}
        for m in range(inst.n_commodities):
            line = inst.capacity[m, v, 1:]
            if not line.any():
                continue
            if (line == line[0]).all():
                caps[inst.commodities[m]] = int(line[0])
            else:
                caps[inst.commodities[m]] = {
                    str(t + 1): int(q) for t, q in enumerate(line) if q}
        if caps:
            doc["capacity"] = caps
        exc = {inst.commodities[m]: float(c)
               for m, c in enumerate(inst.excess_cost[:, v]) if c}
        if exc:
            doc["excess_cost"] = exc
        if v < nd:
            rel = {}
            for m in range(inst.n_commodities):
                line = inst.release[m, v, 1:]
                if line.any():
                    rel[inst.commodities[m]] = {
                        str(t + 1): int(q) for t, q in enumerate(line) if q}
            if rel:
                doc["release"] = rel
        else:
            c = inst.cidx(v)
            dem = {}
            for m in range(inst.n_commodities):
                line = inst.demand[m, c, 1:]
                if line.any():
                    dem[inst.commodities[m]] = {
                        str(t + 1): int(q) for t, q in enumerate(line) if q}
            if dem:
                doc["demand"] = dem
            sh = {inst.commodities[m]: float(x)
                  for m, x in enumerate(inst.shortage_cost[:, c]) if x}
            if sh:
                doc["shortage_cost"] = sh
        return doc

    arcs: dict[str, dict] = {}
    for u in range(inst.n_vertices):
        heads = {}
        for v in range(nd, inst.n_vertices):
            if u == v:
                continue
            heads[inst.vertex_name(v)] = {
                "km": float(inst.distance[u, v]),
                "hours": float(inst.duration[u, v]),
            }
        if heads:
            arcs[inst.vertex_name(u)] = heads

    return {
        "format": INSTANCE_FORMAT,
        "version": FORMAT_VERSION,
        "units": dict(UNITS),
        "horizon": inst.horizon,
        "s_max": inst.s_max,
        "tau_max": inst.tau_max,
        "vehicle_length": inst.vehicle_length,
        "costs": {"vehicle": inst.cost_vehicle, "stop": inst.cost_stop,
                  "km": inst.cost_km},
        "commodities": [{"id": mid, "length": int(inst.lengths[i])}
                        for i, mid in enumerate(inst.commodities)],
        "depots": [site_doc(v) for v in range(nd)],
        "customers": [site_doc(v) for v in range(nd, inst.n_vertices)],
        "arcs": arcs,
    }


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1)
        fh.write("\n")


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Solution documents


def solution_to_dict(inst: Instance, solution: Solution) -> dict:
    routes = []
    for r in solution.routes:
        routes.append({
            "day": r.day,
            "path": [inst.vertex_name(v) for v in r.path],
            "deliveries": [
                {inst.commodities[m]: q for m, q in enumerate(stop) if q}
                for stop in r.quantities
            ],
        })
    return {
        "format": SOLUTION_FORMAT,
        "version": FORMAT_VERSION,
        "routes": routes,
        "cost": solution.cost.as_dict() | {"total": solution.total_cost},
    }


def solution_from_dict(inst: Instance, doc: dict) -> Solution:
    """Rebuild and re-validate a solution against its instance."""
    if doc.get("format") != SOLUTION_FORMAT:
        raise FormatError("format", f"expected '{SOLUTION_FORMAT}'")
    v_index = {inst.vertex_name(v): v for v in range(inst.n_vertices)}
    m_index = {mid: i for i, mid in enumerate(inst.commodities)}
    routes = []
    for i, rdoc in enumerate(doc.get("routes", [])):
        path = []
        for name in _require(rdoc, "path", f"routes[{i}]"):
            if name not in v_index:
                raise FormatError(f"routes[{i}].path", f"unknown site '{name}'")
            path.append(v_index[name])
        qty = []
        for stop in _require(rdoc, "deliveries", f"routes[{i}]"):
            row = [0] * inst.n_commodities
            for mid, q in stop.items():
                if mid not in m_index:
                    raise FormatError(f"routes[{i}].deliveries",
                                      f"unknown commodity '{mid}'")
                row[m_index[mid]] = int(q)
            qty.append(row)
        routes.append(make_route(inst, int(_require(rdoc, "day", f"routes[{i}]")),
                                 path, qty))
    return evaluate(inst, routes)


def save_solution(inst: Instance, solution: Solution, path) -> None:
    with open(path, "w") as fh:
        json.dump(solution_to_dict(inst, solution), fh, indent=1)
        fh.write("\n")


def load_solution(inst: Instance, path) -> Solution:
    with open(path) as fh:
        return solution_from_dict(inst, json.load(fh))


# ---------------------------------------------------------------------------
# Seeded synthetic instances


def generate_instance(seed: int,
                      n_depots: int = 16,
                      n_customers: int = 600,
                      n_commodities: int = 30,
                      horizon: int = 21,
                      *,
                      width_km: float = 3600.0,
                      height_km: float = 2400.0,
                      road_factor: float = 1.3,
                      speed_kmh: float = 65.0,
                      tau_max: float = 9.0,
                      s_max: int = 3,
                      vehicle_length: int = 20,
                      max_item_length: int = 4,
                      demand_density: float = 0.3,
                      demand_mean: float = 2.0,
                      cover_ratio: float = 1.05,
                      initial_cover_days: int = 2,
                      customer_capacity_days: float = 3.0,
                      cost_vehicle: float = 400.0,
                      cost_stop: float = 40.0,
                      cost_km: float = 1.0) -> Instance:
    """Draw a synthetic instance on a rectangle of the given size.

    Sites are uniform in the rectangle; distances are scaled Euclidean (so
    the triangle inequality holds by construction) and durations are
    distance over a constant speed, which makes multi-day routes appear
    once the rectangle is continent sized. Each commodity is released by a
    few depots and demanded by a share of the customers; depot stock plus
    releases cover ``cover_ratio`` of total demand.
    """
    if min(n_depots, n_customers, n_commodities, horizon) < 1:
        raise ValueError("sizes must be at least 1")
    rng = np.random.default_rng(seed)
    nd, nc, nm, t = n_depots, n_customers, n_commodities, horizon
    nv = nd + nc

    xy = np.column_stack([rng.uniform(0, width_km, nv),
                          rng.uniform(0, height_km, nv)])
    diff = xy[:, None, :] - xy[None, :, :]
    distance = np.hypot(diff[..., 0], diff[..., 1]) * road_factor
    distance[:, :nd] = np.inf
    np.fill_diagonal(distance, 0.0)
    duration = np.where(np.isfinite(distance), distance / speed_kmh, np.inf)

    lengths = rng.integers(1, max_item_length + 1, size=nm)
    demand = np.zeros((nm, nc, t + 1), dtype=np.int64)
    release = np.zeros((nm, nd, t + 1), dtype=np.int64)
    initial = np.zeros((nm, nv), dtype=np.int64)
    capacity = np.zeros((nm, nv, t + 1), dtype=np.int64)
    excess_cost = np.zeros((nm, nv))
    shortage_cost = np.zeros((nm, nc))

    for m in range(nm):
        share = rng.uniform(0.1, 0.5)
        users = rng.random(nc) < share
        if not users.any():
            users[rng.integers(nc)] = True
        for c in np.flatnonzero(users):
            days = rng.random(t) < demand_density
            if not days.any():
                days[rng.integers(t)] = True
            qty = 1 + rng.poisson(max(demand_mean - 1.0, 0.0), size=int(days.sum()))
            demand[m, c, 1:][days] = qty
            # Early demand is only coverable from on-site stock.
            horizon_cover = min(initial_cover_days, t)
            initial[m, nd + c] = int(demand[m, c, 1:horizon_cover + 1].sum())
            daily = demand[m, c, 1:].sum() / t
            capacity[m, nd + c, 1:] = max(2, math.ceil(customer_capacity_days * daily))
            excess_cost[m, nd + c] = rng.uniform(0.5, 3.0)
            shortage_cost[m, c] = rng.uniform(80.0, 250.0)

        total_demand = int(demand[m].sum())
        supply_target = math.ceil(cover_ratio * total_demand)
        n_src = int(rng.integers(1, min(3, nd) + 1))
        sources = rng.choice(nd, size=n_src, replace=False)
        init_share = rng.uniform(0.5, 0.7)
        init_total = math.ceil(init_share * supply_target)
        weights = rng.dirichlet(np.ones(n_src))
        for d, w in zip(sources, weights):
            initial[m, d] += math.ceil(w * init_total)
        remaining = max(supply_target - int(initial[m, :nd].sum()), 0)
        release_days = max(t - 2, 1)
        while remaining > 0:
            d = sources[int(rng.integers(n_src))]
            day = 1 + int(rng.integers(release_days))
            q = int(min(remaining, 1 + rng.integers(5)))
            release[m, d, day] += q
            remaining -= q
        for d in sources:
            stock_peak = int(initial[m, d] + release[m, d].sum())
            capacity[m, d, 1:] = max(1, math.ceil(0.6 * stock_peak))
            excess_cost[m, d] = rng.uniform(0.2, 1.0)

    inst = Instance(
        commodities=tuple(f"m{i+1}" for i in range(nm)),
        depots=tuple(f"d{i+1}" for i in range(nd)),
        customers=tuple(f"c{i+1}" for i in range(nc)),
        horizon=t,
        lengths=lengths.astype(np.int64),
        vehicle_length=vehicle_length,
        initial_inventory=initial,
        release=release,
        demand=demand,
        capacity=capacity,
        excess_cost=excess_cost,
        shortage_cost=shortage_cost,
        cost_vehicle=cost_vehicle,
        cost_stop=cost_stop,
        cost_km=cost_km,
        distance=distance,
        duration=duration,
        s_max=s_max,
        tau_max=tau_max,
    )
    return inst.validate()


def micro_instance() -> Instance:
    """A hand-sized fixture: one depot, two customers, one commodity.

    The optimum is a single two-stop route leaving on day 1; handy for
    exhaustive enumeration in tests and for demos.
    """
    distance = np.array([
        [0.0, 60.0, 70.0],
        [np.inf, 0.0, 50.0],
        [np.inf, 50.0, 0.0],
    ])
    duration = np.where(np.isfinite(distance), distance / 10.0, np.inf)
    demand = np.zeros((1, 2, 4), dtype=np.int64)
    demand[0, 0, 2] = 2   # c1 needs 2 units on day 2
    demand[0, 1, 3] = 2   # c2 needs 2 units on day 3
    capacity = np.zeros((1, 3, 4), dtype=np.int64)
    capacity[0, 0, 1:] = 50
    capacity[0, 1:, 1:] = 5
    inst = Instance(
        commodities=("m1",),
        depots=("d1",),
        customers=("c1", "c2"),
        horizon=3,
        lengths=np.array([2], dtype=np.int64),
        vehicle_length=10,
        initial_inventory=np.array([[20, 0, 0]], dtype=np.int64),
        release=np.zeros((1, 1, 4), dtype=np.int64),
        demand=demand,
        capacity=capacity,
        excess_cost=np.array([[1.0, 2.0, 2.0]]),
        shortage_cost=np.array([[100.0, 100.0]]),
        cost_vehicle=100.0,
        cost_stop=10.0,
        cost_km=1.0,
        distance=distance,
        duration=duration,
        s_max=3,
        tau_max=10.0,
    )
    return inst.validate()
