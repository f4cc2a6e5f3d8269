"""Integral min-cost circulations by successive shortest augmenting paths.

Lower bounds are handled by saturating them first and repairing the
resulting vertex imbalances through a super source and sink. Shortest
augmenting paths run on reduced costs kept nonnegative by vertex
potentials (one Bellman-Ford pass up front, Dijkstra afterwards), so the
final potentials certify optimality and double as the solution's dual.

Also hosts the per-commodity flow relaxation that yields the global lower
bound on any feasible solution's cost.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .model import Instance
from .timegraph import FlowNetwork, build_shared_skeleton, add_relaxation_route_arcs


class InfeasibleNetwork(ValueError):
    """No circulation satisfies the arc bounds; carries a cut witness."""

    def __init__(self, message: str, cut: frozenset[int]):
        super().__init__(message)
        self.cut = cut


@dataclass
class CirculationSolution:
    """Integral arc flows with their cost and an optimality certificate."""

    flow: np.ndarray        # (n_arcs,) int
    cost: float
    potentials: np.ndarray  # (n_vertices,) float


def solve_min_cost_circulation(net: FlowNetwork) -> CirculationSolution:
    """Cheapest integral circulation of ``net``; deterministic ties.

    Lower-bounded arcs start at their lower bound and negative-cost arcs
    start saturated, so every initial residual arc has nonnegative cost
    and plain Dijkstra with potentials applies from the first iteration.
    """
    n = net.n_vertices
    arcs = net.arcs
    source, sink = n, n + 1
    nn = n + 2

    # Residual edges come in pairs 2k (forward) and 2k+1 (backward) per
    # arc, followed by the super source/sink repair edges.
    heads: list[int] = []
    caps: list[int] = []
    costs: list[float] = []
    adj: list[list[int]] = [[] for _ in range(nn)]

    def add_edge(u: int, v: int, cap: int, back_cap: int, cost: float):
        adj[u].append(len(heads))
        heads.append(v)
        caps.append(cap)
        costs.append(cost)
        adj[v].append(len(heads))
        heads.append(u)
        caps.append(back_cap)
        costs.append(-cost)

    excess = np.zeros(nn, dtype=np.int64)
    for a in arcs:
        start = a.upper if a.cost < 0 else a.lower
        add_edge(a.tail, a.head, a.upper - start, start - a.lower, a.cost)
        excess[a.head] += start
        excess[a.tail] -= start
    total_excess = 0
    for v in range(n):
        if excess[v] > 0:
            add_edge(source, v, int(excess[v]), 0, 0.0)
            total_excess += int(excess[v])
        elif excess[v] < 0:
            add_edge(v, sink, int(-excess[v]), 0, 0.0)

    pot = np.zeros(nn)
    remaining = total_excess
    while remaining > 0:
        dist, pred = _dijkstra(nn, adj, heads, caps, costs, pot, source)
        if not np.isfinite(dist[sink]):
            reachable = frozenset(v for v in range(n) if np.isfinite(dist[v]))
            raise InfeasibleNetwork(
                "lower bounds admit no circulation", reachable)
        # Capping at the sink distance keeps reduced costs nonnegative
        # also around vertices this search did not settle.
        pot += np.minimum(dist, dist[sink])
        bottleneck = remaining
        v = sink
        while v != source:
            e = pred[v]
            bottleneck = min(bottleneck, caps[e])
            v = heads[e ^ 1]
        v = sink
        while v != source:
            e = pred[v]
            caps[e] -= bottleneck
            caps[e ^ 1] += bottleneck
            v = heads[e ^ 1]
        remaining -= bottleneck

    flow = np.empty(len(arcs), dtype=np.int64)
    cost = 0.0
    for k, a in enumerate(arcs):
        flow[k] = a.lower + caps[2 * k + 1]
        cost += float(flow[k]) * a.cost
    return CirculationSolution(flow=flow, cost=cost, potentials=pot[:n].copy())


def _dijkstra(nn, adj, heads, caps, costs, pot, source):
    dist = np.full(nn, np.inf)
    pred = np.full(nn, -1, dtype=np.int64)
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = np.zeros(nn, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for e in adj[u]:
            if caps[e] <= 0:
                continue
            v = heads[e]
            if done[v]:
                continue
            nd = d + costs[e] + pot[u] - pot[v]
            if nd < dist[v] - 1e-12:
                dist[v] = nd
                pred[v] = e
                heapq.heappush(heap, (nd, v))
            elif nd <= dist[v] + 1e-12 and pred[v] >= 0 and e < pred[v]:
                pred[v] = e  # deterministic tie-break: lowest edge id
    return dist, pred


def verify_optimality(net: FlowNetwork, sol: CirculationSolution,
                      tol: float = 1e-6) -> bool:
    """Independent certificate check: conservation, bounds, reduced costs."""
    n = net.n_vertices
    balance = np.zeros(n, dtype=np.int64)
    for k, a in enumerate(net.arcs):
        f = int(sol.flow[k])
        if f < a.lower or f > a.upper:
            return False
        balance[a.tail] -= f
        balance[a.head] += f
        reduced = a.cost + sol.potentials[a.tail] - sol.potentials[a.head]
        if f < a.upper and reduced < -tol:
            return False
        if f > a.lower and reduced > tol:
            return False
    return bool((balance == 0).all())


def relaxation_network(inst: Instance, m: int, *, include_delayed: bool = True,
                       delays: dict | None = None) -> FlowNetwork:
    """Per-commodity relaxation graph over the sites that use it."""
    net = build_shared_skeleton(inst, m, inst.depots_using(m),
                                inst.customers_using(m))
    return add_relaxation_route_arcs(net, inst, m,
                                     include_delayed=include_delayed,
                                     delays=delays)


def lower_bound(inst: Instance, delays: dict | None = None) -> float:
    """Sum of the per-commodity relaxation optima: no feasible solution
    can cost less."""
    total = 0.0
    for m in range(inst.n_commodities):
        if not inst.uses[m].any():
            continue
        net = relaxation_network(inst, m, include_delayed=True, delays=delays)
        total += solve_min_cost_circulation(net).cost
    return total
