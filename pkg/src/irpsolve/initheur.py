"""Initial solutions from per-commodity flows plus bin packing.

The flow relaxation fixes who sends how much to whom on which day, using
only direct transport arcs (delayed arcs exist solely for the lower
bound). Per (depot, customer, day) triple the shipped units then become
unit items packed first-fit-decreasing into vehicles, one direct route
per bin.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mcf import CirculationSolution, relaxation_network, solve_min_cost_circulation
from .model import Instance, Solution, evaluate, make_route
from .timegraph import FlowNetwork


class ItemTooLong(ValueError):
    """An item exceeds the bin capacity."""


@dataclass
class CommodityFlow:
    network: FlowNetwork
    circulation: CirculationSolution


def flow_relaxation(inst: Instance) -> dict[int, CommodityFlow]:
    """Optimal direct-arc circulation per commodity in use."""
    flows: dict[int, CommodityFlow] = {}
    for m in range(inst.n_commodities):
        if not inst.uses[m].any():
            continue
        net = relaxation_network(inst, m, include_delayed=False)
        flows[m] = CommodityFlow(net, solve_min_cost_circulation(net))
    return flows


def bin_packing_ffd(item_lengths, capacity) -> list[list[int]]:
    """First-fit decreasing; ties between equal lengths keep input order.

    Returns bins as lists of item indices into ``item_lengths``.
    """
    order = sorted(range(len(item_lengths)), key=lambda i: (-item_lengths[i], i))
    bins: list[list[int]] = []
    room: list[float] = []
    for i in order:
        size = item_lengths[i]
        if size > capacity:
            raise ItemTooLong(f"item {i} of length {size} exceeds capacity {capacity}")
        for b, free in enumerate(room):
            if size <= free:
                bins[b].append(i)
                room[b] -= size
                break
        else:
            bins.append([i])
            room.append(capacity - size)
    return bins


def build_initial_solution(inst: Instance,
                           flows: dict[int, CommodityFlow]) -> Solution:
    """Expand transport flows into direct routes; shipments match exactly."""
    shipments: dict[tuple[int, int, int], dict[int, int]] = {}
    for m, cf in flows.items():
        for arc, units in zip(cf.network.arcs, cf.circulation.flow):
            if units == 0 or not arc.role.startswith("transport"):
                continue
            _, day, depot, customer, _arrive = arc.key
            per_m = shipments.setdefault((depot, customer, day), {})
            per_m[m] = per_m.get(m, 0) + int(units)

    routes = []
    for (depot, customer, day) in sorted(shipments):
        per_m = shipments[(depot, customer, day)]
        items: list[int] = []          # commodity index per unit item
        lengths: list[int] = []
        for m in sorted(per_m):
            items.extend([m] * per_m[m])
            lengths.extend([int(inst.lengths[m])] * per_m[m])
        for group in bin_packing_ffd(lengths, inst.vehicle_length):
            qty = [0] * inst.n_commodities
            for i in group:
                qty[items[i]] += 1
            routes.append(make_route(inst, day, (depot, customer), [qty]))
    return evaluate(inst, routes)
