"""Problem data, timed routes, and the exact cost evaluator.

Vertices are integer indices: depots first (``0 .. n_depots-1``), then
customers. Days run from 1 to ``horizon``; index 0 of every time-indexed
array holds the day-0 (initial) state. Quantities, demands, capacities and
inventories are integers. Money is float64 and cost comparisons use the
absolute tolerance ``COST_TOL``.

Timing convention: a route departs its depot in the morning of its start
day and each delivery lands in the evening of the stop's arrival day, so
goods delivered on day t can first serve demand on day t+1. A depot ships
in the morning of the departure day and may use that same day's release.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

COST_TOL = 1e-6


class InvalidRoute(ValueError):
    """Path or loading violates the route admissibility rules."""


class InvalidDelivery(ValueError):
    """A route delivers a commodity to a customer that never uses it."""


class InfeasibleDepot(ValueError):
    """A depot ships more than it holds on some day."""


@dataclass
class Instance:
    """Static data of one inventory routing problem.

    Arrays are indexed ``[commodity, vertex, day]`` with depots occupying
    vertex slots ``0..n_depots-1``. Customer-only arrays (demand,
    shortage_cost) use local customer indices ``0..n_customers-1``.
    """

    commodities: tuple[str, ...]
    depots: tuple[str, ...]
    customers: tuple[str, ...]
    horizon: int
    lengths: np.ndarray            # (M,) int, commodity size in load units
    vehicle_length: int
    initial_inventory: np.ndarray  # (M, V) int
    release: np.ndarray            # (M, D, T+1) int, day 0 unused
    demand: np.ndarray             # (M, C, T+1) int, day 0 unused
    capacity: np.ndarray           # (M, V, T+1) int, free stock per night
    excess_cost: np.ndarray        # (M, V) float, per unit per night
    shortage_cost: np.ndarray      # (M, C) float, per unit
    cost_vehicle: float
    cost_stop: float
    cost_km: float
    distance: np.ndarray           # (V, V) float km, arcs u -> customer only
    duration: np.ndarray           # (V, V) float hours
    s_max: int
    tau_max: float

    uses: np.ndarray = field(init=False, repr=False)  # (M, V) bool

    def __post_init__(self):
        m, d, c = len(self.commodities), len(self.depots), len(self.customers)
        uses = np.zeros((m, d + c), dtype=bool)
        uses[:, :d] = (self.initial_inventory[:, :d] > 0) | (self.release[:, :, 1:].sum(axis=2) > 0)
        uses[:, d:] = (self.initial_inventory[:, d:] > 0) | (self.demand[:, :, 1:].sum(axis=2) > 0)
        self.uses = uses

    # -- index helpers -----------------------------------------------------
    @property
    def n_commodities(self) -> int:
        return len(self.commodities)

    @property
    def n_depots(self) -> int:
        return len(self.depots)

    @property
    def n_customers(self) -> int:
        return len(self.customers)

    @property
    def n_vertices(self) -> int:
        return self.n_depots + self.n_customers

    def is_depot(self, v: int) -> bool:
        return 0 <= v < self.n_depots

    def cidx(self, v: int) -> int:
        """Local customer index of a customer vertex."""
        return v - self.n_depots

    def vertex_name(self, v: int) -> str:
        if self.is_depot(v):
            return self.depots[v]
        return self.customers[self.cidx(v)]

    def depots_using(self, m: int) -> list[int]:
        return [d for d in range(self.n_depots) if self.uses[m, d]]

    def customers_using(self, m: int) -> list[int]:
        nd = self.n_depots
        return [nd + c for c in range(self.n_customers) if self.uses[m, nd + c]]

    def commodity_supply(self, m: int) -> int:
        """Finite stand-in for unbounded arc capacities of commodity m."""
        return int(self.initial_inventory[m].sum()
                   + self.release[m, :, 1:].sum()
                   + self.demand[m, :, 1:].sum())

    # -- validation --------------------------------------------------------
    def validate(self):
        """Check shapes, sign constraints and the distance triangle inequality."""
        m, d, c = self.n_commodities, self.n_depots, self.n_customers
        v = d + c
        t = self.horizon
        if t < 1:
            raise ValueError("horizon must be at least one day")
        if self.s_max < 1:
            raise ValueError("s_max must be at least 1")
        if self.tau_max <= 0:
            raise ValueError("tau_max must be positive")
        shapes = {
            "lengths": (self.lengths, (m,)),
            "initial_inventory": (self.initial_inventory, (m, v)),
            "release": (self.release, (m, d, t + 1)),
            "demand": (self.demand, (m, c, t + 1)),
            "capacity": (self.capacity, (m, v, t + 1)),
            "excess_cost": (self.excess_cost, (m, v)),
            "shortage_cost": (self.shortage_cost, (m, c)),
            "distance": (self.distance, (v, v)),
            "duration": (self.duration, (v, v)),
        }
        for name, (arr, shape) in shapes.items():
            if arr.shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {arr.shape}")
        for name in ("lengths", "initial_inventory", "release", "demand",
                     "capacity", "excess_cost", "shortage_cost"):
            if (shapes[name][0] < 0).any():
                raise ValueError(f"{name} contains negative entries")
        if min(self.cost_vehicle, self.cost_stop, self.cost_km) < 0:
            raise ValueError("unit routing costs must be nonnegative")
        if self.vehicle_length <= 0:
            raise ValueError("vehicle_length must be positive")
        if (self.lengths > self.vehicle_length).any():
            raise ValueError("every commodity must fit in a vehicle")
        dc = self.distance[:, d:]
        if not np.isfinite(dc).all() or (dc < 0).any():
            raise ValueError("distances to customers must be finite and nonnegative")
        du = self.duration[:, d:]
        if not np.isfinite(du).all() or (du < 0).any():
            raise ValueError("durations to customers must be finite and nonnegative")
        # Triangle inequality over triples (u -> w) vs (u -> v -> w), v and w customers.
        cc = self.distance[d:, d:]
        for u in range(v):
            direct = self.distance[u, d:]
            via = direct[:, None] + cc
            if (direct[None, :] > via + 1e-9).any():
                raise ValueError(
                    f"triangle inequality violated for arcs out of {self.vertex_name(u)}")
        return self


# ---------------------------------------------------------------------------
# Routes


@dataclass(frozen=True)
class Route:
    """A timed and loaded path: one vehicle leaving a depot once.

    ``quantities[s][m]`` is the amount of commodity m dropped at stop s
    (0-based over ``path[1:]``). ``hours`` and ``arrivals`` are caches of
    the cumulative driving time and arrival day per stop; they always equal
    the values recomputed from the instance data.
    """

    day: int
    path: tuple[int, ...]
    quantities: tuple[tuple[int, ...], ...]
    hours: tuple[float, ...]
    arrivals: tuple[int, ...]

    @property
    def depot(self) -> int:
        return self.path[0]

    @property
    def stops(self) -> tuple[int, ...]:
        return self.path[1:]

    @property
    def n_stops(self) -> int:
        return len(self.path) - 1

    def load_units(self, lengths: np.ndarray) -> int:
        return int(sum(int(lengths[m]) * q
                       for stop in self.quantities for m, q in enumerate(stop)))

    def stop_quantity(self, s: int, m: int) -> int:
        return self.quantities[s][m]


def route_timing(instance: Instance, day: int, path: Sequence[int]
                 ) -> tuple[tuple[float, ...], tuple[int, ...]]:
    """Cumulative driving hours and arrival day at each stop of ``path``.

    Driving pauses: after each ``tau_max`` cumulative hours the driver
    rests until the next day, so the arrival day is the departure day plus
    ``floor(hours / tau_max)``.
    """
    nd, nv = instance.n_depots, instance.n_vertices
    if len(path) < 2:
        raise InvalidRoute("a route needs a depot and at least one stop")
    if not instance.is_depot(path[0]):
        raise InvalidRoute(f"path must start at a depot, got vertex {path[0]}")
    seen = set()
    for v in path[1:]:
        if not (nd <= v < nv):
            raise InvalidRoute(f"stop {v} is not a customer")
        if v in seen:
            raise InvalidRoute(f"customer {v} visited twice")
        seen.add(v)
    hours = []
    arrivals = []
    total = 0.0
    for prev, cur in zip(path, path[1:]):
        total += float(instance.duration[prev, cur])
        hours.append(total)
        arrivals.append(day + int(total // instance.tau_max))
    return tuple(hours), tuple(arrivals)


def make_route(instance: Instance, day: int, path: Sequence[int],
               quantities: Sequence[Sequence[int]]) -> Route:
    """Validate and build a route, rejecting any admissibility violation."""
    if not 1 <= day <= instance.horizon:
        raise InvalidRoute(f"departure day {day} outside horizon")
    if len(path) > instance.s_max + 1:
        raise InvalidRoute(f"route has {len(path) - 1} stops, limit {instance.s_max}")
    hours, arrivals = route_timing(instance, day, path)
    if arrivals[-1] > instance.horizon:
        raise InvalidRoute("route arrives after the end of the horizon")
    if len(quantities) != len(path) - 1:
        raise InvalidRoute("one quantity vector needed per stop")
    m = instance.n_commodities
    qt = []
    load = 0
    for stop_q in quantities:
        if len(stop_q) != m:
            raise InvalidRoute("quantity vectors must cover every commodity")
        row = tuple(int(q) for q in stop_q)
        if any(q < 0 for q in row):
            raise InvalidRoute("negative delivery quantity")
        load += sum(int(instance.lengths[i]) * q for i, q in enumerate(row))
        qt.append(row)
    if load > instance.vehicle_length:
        raise InvalidRoute(f"load {load} exceeds vehicle length {instance.vehicle_length}")
    return Route(day=day, path=tuple(path), quantities=tuple(qt),
                 hours=hours, arrivals=arrivals)


def route_cost(instance: Instance, route: Route) -> float:
    """Fixed routing price of one vehicle on this path, loads play no role."""
    km = sum(float(instance.distance[u, v]) for u, v in zip(route.path, route.path[1:]))
    return (instance.cost_vehicle
            + instance.cost_stop * route.n_stops
            + instance.cost_km * km)


def free_capacity(instance: Instance, route: Route) -> int:
    """Unused load units left in the vehicle."""
    return instance.vehicle_length - route.load_units(instance.lengths)


# ---------------------------------------------------------------------------
# Solutions


@dataclass(frozen=True)
class CostBreakdown:
    """Total cost split into its six origins."""

    depot_excess: float = 0.0
    customer_excess: float = 0.0
    shortage: float = 0.0
    vehicle: float = 0.0
    stop: float = 0.0
    km: float = 0.0

    @property
    def total(self) -> float:
        return (self.depot_excess + self.customer_excess + self.shortage
                + self.vehicle + self.stop + self.km)

    def as_dict(self) -> dict[str, float]:
        return {
            "depot_excess": self.depot_excess,
            "customer_excess": self.customer_excess,
            "shortage": self.shortage,
            "vehicle": self.vehicle,
            "stop": self.stop,
            "km": self.km,
        }


@dataclass
class Solution:
    """A multiset of routes plus the inventory state they induce."""

    routes: list[Route]
    z_out: np.ndarray      # (M, D, T+1) shipped per depot and departure day
    z_in: np.ndarray       # (M, C, T+1) delivered per customer and arrival day
    inventory: np.ndarray  # (M, V, T+1) evening stock, day 0 initial
    shortage: np.ndarray   # (M, C, T+1) unmet demand units
    cost: CostBreakdown

    @property
    def total_cost(self) -> float:
        return self.cost.total


def _accumulate_shipments(instance: Instance, routes: Iterable[Route]):
    m, nd = instance.n_commodities, instance.n_depots
    t = instance.horizon
    z_out = np.zeros((m, nd, t + 1), dtype=np.int64)
    z_in = np.zeros((m, instance.n_customers, t + 1), dtype=np.int64)
    for r in routes:
        for s, c in enumerate(r.stops):
            arr = r.arrivals[s]
            for mi, q in enumerate(r.quantities[s]):
                if q == 0:
                    continue
                if not instance.uses[mi, c]:
                    raise InvalidDelivery(
                        f"commodity {instance.commodities[mi]} delivered to "
                        f"{instance.vertex_name(c)} which never uses it")
                z_out[mi, r.depot, r.day] += q
                z_in[mi, instance.cidx(c), arr] += q
    return z_out, z_in


def evaluate(instance: Instance, routes: Iterable[Route]) -> Solution:
    """Exact cost and inventory state of a route multiset.

    Depot stock follows ``I_t = I_{t-1} + release_t - shipped_t`` and must
    stay nonnegative. Customer stock is clamped: demand draws on the
    previous evening's stock, unmet units are bought as shortage, and the
    day's deliveries land afterwards.
    """
    routes = list(routes)
    m, nd, nc = instance.n_commodities, instance.n_depots, instance.n_customers
    t = instance.horizon
    z_out, z_in = _accumulate_shipments(instance, routes)

    inv = np.zeros((m, nd + nc, t + 1), dtype=np.int64)
    inv[:, :, 0] = instance.initial_inventory
    short = np.zeros((m, nc, t + 1), dtype=np.int64)
    for day in range(1, t + 1):
        dep = inv[:, :nd, day - 1] + instance.release[:, :, day] - z_out[:, :, day]
        if (dep < 0).any():
            mi, di = np.argwhere(dep < 0)[0]
            raise InfeasibleDepot(
                f"depot {instance.depots[di]} ships more "
                f"{instance.commodities[mi]} than it holds on day {day}")
        inv[:, :nd, day] = dep
        served = np.minimum(inv[:, nd:, day - 1], instance.demand[:, :, day])
        short[:, :, day] = instance.demand[:, :, day] - served
        inv[:, nd:, day] = inv[:, nd:, day - 1] - served + z_in[:, :, day]

    over = np.maximum(inv[:, :, 1:] - instance.capacity[:, :, 1:], 0)
    depot_excess = float((over[:, :nd] * instance.excess_cost[:, :nd, None]).sum())
    customer_excess = float((over[:, nd:] * instance.excess_cost[:, nd:, None]).sum())
    shortage_cost = float((short[:, :, 1:] * instance.shortage_cost[:, :, None]).sum())
    km = sum(sum(float(instance.distance[u, v]) for u, v in zip(r.path, r.path[1:]))
             for r in routes)
    breakdown = CostBreakdown(
        depot_excess=depot_excess,
        customer_excess=customer_excess,
        shortage=shortage_cost,
        vehicle=instance.cost_vehicle * len(routes),
        stop=instance.cost_stop * sum(r.n_stops for r in routes),
        km=instance.cost_km * km,
    )
    return Solution(routes=routes, z_out=z_out, z_in=z_in, inventory=inv,
                    shortage=short, cost=breakdown)


def _depot_line_cost(instance: Instance, m: int, d: int, z_line: np.ndarray) -> float:
    """Excess cost of depot d's commodity-m stock under shipments ``z_line``."""
    t = instance.horizon
    stock = int(instance.initial_inventory[m, d])
    cost = 0.0
    for day in range(1, t + 1):
        stock += int(instance.release[m, d, day]) - int(z_line[day])
        if stock < 0:
            raise InfeasibleDepot(
                f"depot {instance.depots[d]} ships more "
                f"{instance.commodities[m]} than it holds on day {day}")
        over = stock - int(instance.capacity[m, d, day])
        if over > 0:
            cost += over * float(instance.excess_cost[m, d])
    return cost


def _customer_line_cost(instance: Instance, m: int, c: int, z_line: np.ndarray) -> float:
    """Excess plus shortage cost of customer c (local index) for commodity m."""
    t = instance.horizon
    nd = instance.n_depots
    stock = int(instance.initial_inventory[m, nd + c])
    cost = 0.0
    for day in range(1, t + 1):
        need = int(instance.demand[m, c, day])
        served = min(stock, need)
        missing = need - served
        if missing:
            cost += missing * float(instance.shortage_cost[m, c])
        stock = stock - served + int(z_line[day])
        over = stock - int(instance.capacity[m, nd + c, day])
        if over > 0:
            cost += over * float(instance.excess_cost[m, nd + c])
    return cost


def delta_evaluate(instance: Instance, solution: Solution,
                   routes_before: Sequence[Route],
                   routes_after: Sequence[Route]) -> float:
    """Signed cost change of swapping ``routes_before`` for ``routes_after``.

    Only inventory lines of depots, customers and commodities touched by the
    changed routes are recomputed; the result equals the difference of two
    full evaluations. Raises :class:`InfeasibleDepot` when the change would
    force a depot to ship stock it does not hold, and
    :class:`InvalidDelivery` on deliveries to non-users.
    """
    t = instance.horizon
    nd = instance.n_depots
    d_out: dict[tuple[int, int], np.ndarray] = {}
    d_in: dict[tuple[int, int], np.ndarray] = {}

    def bump(store, key):
        line = store.get(key)
        if line is None:
            line = store[key] = np.zeros(t + 1, dtype=np.int64)
        return line

    delta_routing = 0.0
    for sign, group in ((-1, routes_before), (1, routes_after)):
        for r in group:
            delta_routing += sign * route_cost(instance, r)
            for s, c in enumerate(r.stops):
                for mi, q in enumerate(r.quantities[s]):
                    if q == 0:
                        continue
                    if sign > 0 and not instance.uses[mi, c]:
                        raise InvalidDelivery(
                            f"commodity {instance.commodities[mi]} delivered to "
                            f"{instance.vertex_name(c)} which never uses it")
                    bump(d_out, (mi, r.depot))[r.day] += sign * q
                    bump(d_in, (mi, instance.cidx(c)))[r.arrivals[s]] += sign * q

    delta = delta_routing
    for (mi, d), line in d_out.items():
        if not line.any():
            continue
        old = _depot_line_cost(instance, mi, d, solution.z_out[mi, d])
        new = _depot_line_cost(instance, mi, d, solution.z_out[mi, d] + line)
        delta += new - old
    for (mi, c), line in d_in.items():
        if not line.any():
            continue
        old = _customer_line_cost(instance, mi, c, solution.z_in[mi, c])
        new = _customer_line_cost(instance, mi, c, solution.z_in[mi, c] + line)
        delta += new - old
    return delta
