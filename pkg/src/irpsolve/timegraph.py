"""Time-expanded commodity flow graphs.

Per commodity, the shared skeleton unrolls each site's inventory over the
horizon: morning vertices take stock in (carry-over, releases, initial
stock, shortage purchases), evening vertices hold what stays overnight,
and nights split into a free arc capped by the storage allowance and a
priced overflow arc. Artificial vertices close everything into a
circulation. Formulation-specific transport arcs are added on top.

Arc bounds are integers; "unbounded" arcs carry a finite stand-in equal to
the commodity's total volume (initial stock + releases + demand), which no
arc ever needs to exceed in an optimal circulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Instance

SOURCE = ("source",)
SINK = ("sink",)
INITIAL = ("initial",)
FINAL = ("final",)
RELEASE = ("release",)
SHORTAGE = ("shortage",)
DEMAND = ("demand",)


def morning(t: int, v: int) -> tuple:
    return ("morning", t, v)


def evening(t: int, v: int) -> tuple:
    return ("evening", t, v)


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    lower: int
    upper: int
    cost: float
    role: str
    key: tuple = ()


@dataclass
class FlowNetwork:
    """A directed graph with integer arc bounds, unit costs and role tags."""

    name: str = ""
    labels: list[tuple] = field(default_factory=list)
    arcs: list[Arc] = field(default_factory=list)
    _ids: dict[tuple, int] = field(default_factory=dict, repr=False)

    def vertex(self, label: tuple) -> int:
        vid = self._ids.get(label)
        if vid is None:
            vid = len(self.labels)
            self._ids[label] = vid
            self.labels.append(label)
        return vid

    def find(self, label: tuple) -> int:
        return self._ids[label]

    def add_arc(self, tail: tuple, head: tuple, *, lower: int = 0, upper: int,
                cost: float = 0.0, role: str, key: tuple = ()) -> int:
        if lower > upper:
            raise ValueError(f"arc {tail}->{head}: lower {lower} > upper {upper}")
        arc = Arc(self.vertex(tail), self.vertex(head), int(lower), int(upper),
                  float(cost), role, key)
        self.arcs.append(arc)
        return len(self.arcs) - 1

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    def arcs_with_role(self, role: str) -> list[tuple[int, Arc]]:
        return [(i, a) for i, a in enumerate(self.arcs) if a.role == role]

    def arc_index_by_key(self) -> dict[tuple, int]:
        return {a.key: i for i, a in enumerate(self.arcs) if a.key}

    def to_dot(self) -> str:
        """Graphviz text dump for eyeballing small networks."""
        out = [f'digraph "{self.name or "flow"}" {{']
        for i, label in enumerate(self.labels):
            text = ",".join(str(x) for x in label)
            out.append(f'  v{i} [label="{text}"];')
        for a in self.arcs:
            out.append(
                f'  v{a.tail} -> v{a.head} '
                f'[label="[{a.lower},{a.upper}] {a.cost:g} {a.role}"];')
        out.append("}")
        return "\n".join(out)


def build_shared_skeleton(inst: Instance, m: int, depot_set, customer_set,
                          *, name: str = "") -> FlowNetwork:
    """Inventory dynamics of commodity ``m`` over the given sites.

    Rejects an empty depot set when customers demand the commodity without
    holding initial stock, which no generated instance should produce.
    """
    depot_set = sorted(depot_set)
    customer_set = sorted(customer_set)
    if not depot_set:
        has_demand = any(inst.demand[m, inst.cidx(c), 1:].sum() > 0
                         for c in customer_set)
        has_stock = any(inst.initial_inventory[m, c] > 0 for c in customer_set)
        if has_demand and not has_stock:
            raise ValueError(
                f"commodity {inst.commodities[m]} is demanded but no depot supplies it")
    net = FlowNetwork(name=name or f"commodity-{inst.commodities[m]}")
    t_end = inst.horizon
    big = max(inst.commodity_supply(m), 1)

    for v in depot_set + customer_set:
        is_depot = inst.is_depot(v)
        i0 = int(inst.initial_inventory[m, v])
        net.add_arc(INITIAL, morning(1, v), lower=i0, upper=i0,
                    role="initial_inventory", key=("initial", v))
        net.add_arc(morning(t_end + 1, v), FINAL, upper=big,
                    role="final_inventory", key=("final", v))
        for t in range(1, t_end + 1):
            if is_depot:
                b = int(inst.release[m, v, t])
                net.add_arc(RELEASE, morning(t, v), lower=b, upper=b,
                            role="release", key=("release", t, v))
            else:
                b = int(inst.demand[m, inst.cidx(v), t])
                net.add_arc(morning(t, v), DEMAND, lower=b, upper=b,
                            role="demand", key=("demand", t, v))
                net.add_arc(SHORTAGE, morning(t, v), upper=big,
                            cost=float(inst.shortage_cost[m, inst.cidx(v)]),
                            role="shortage", key=("shortage", t, v))
            net.add_arc(morning(t, v), evening(t, v), upper=big,
                        role="daily", key=("daily", t, v))
            net.add_arc(evening(t, v), morning(t + 1, v),
                        upper=int(inst.capacity[m, v, t]),
                        role="night_free", key=("night_free", t, v))
            net.add_arc(evening(t, v), morning(t + 1, v), upper=big,
                        cost=float(inst.excess_cost[m, v]),
                        role="night_excess", key=("night_excess", t, v))

    for tail, head in ((SOURCE, RELEASE), (SOURCE, INITIAL), (SOURCE, SHORTAGE),
                       (DEMAND, SINK), (FINAL, SINK), (SINK, SOURCE)):
        net.add_arc(tail, head, upper=4 * big, role="circulation",
                    key=("circulation", tail[0], head[0]))
    return net


def enumerate_delays(inst: Instance, d: int, c: int,
                     max_offsets: int = 8) -> tuple[int, ...]:
    """Distinct whole-day delays of admissible paths from d ending at c.

    Walks every elementary path of at most ``s_max`` stops, carrying the
    cumulative driving hours, and keeps the distinct ``hours // tau_max``
    values. Partial paths already pausing past day ``horizon - 1`` are
    dropped, and only the ``max_offsets`` smallest offsets are kept.
    """
    offsets: set[int] = set()
    nd, nv = inst.n_depots, inst.n_vertices
    max_offset = inst.horizon - 1
    dur = inst.duration
    tau = inst.tau_max
    stack = [(d, 0.0, 1, 1 << (d - nd) if d >= nd else 0)]
    while stack:
        u, hours, depth, visited = stack.pop()
        for v in range(nd, nv):
            if v == u or visited & (1 << (v - nd)):
                continue
            h = hours + float(dur[u, v])
            off = int(h // tau)
            if off > max_offset:
                continue
            if v == c:
                offsets.add(off)
            if depth < inst.s_max:
                stack.append((v, h, depth + 1, visited | (1 << (v - nd))))
    direct = int(float(dur[d, c]) // tau)
    if direct <= max_offset:
        offsets.add(direct)
    return tuple(sorted(offsets)[:max_offsets])


def add_relaxation_route_arcs(net: FlowNetwork, inst: Instance, m: int,
                              *, include_delayed: bool = True,
                              delays: dict | None = None) -> FlowNetwork:
    """Direct (and optionally delayed) depot-to-customer transport arcs.

    Each unit pays the vehicle-fraction price: the share of a vehicle the
    commodity occupies times the full price of a one-stop trip. Arcs whose
    arrival would fall past the horizon are omitted.
    """
    big = max(inst.commodity_supply(m), 1)
    length_share = float(inst.lengths[m]) / inst.vehicle_length
    sites = {lab[2] for lab in net.labels if lab[0] == "morning"}
    depots = sorted(v for v in sites if inst.is_depot(v))
    customers = sorted(v for v in sites if not inst.is_depot(v))
    for d in depots:
        for c in customers:
            price = length_share * (inst.cost_vehicle + inst.cost_stop
                                    + inst.cost_km * float(inst.distance[d, c]))
            direct = int(float(inst.duration[d, c]) // inst.tau_max)
            if include_delayed:
                if delays is not None and (d, c) in delays:
                    offsets = delays[(d, c)]
                else:
                    offsets = enumerate_delays(inst, d, c)
            else:
                offsets = (direct,)
            for off in offsets:
                role = "transport" if off == direct else "transport_delayed"
                for t in range(1, inst.horizon + 1):
                    arrive = t + off
                    if arrive > inst.horizon:
                        break
                    net.add_arc(morning(t, d), evening(arrive, c), upper=big,
                                cost=price, role=role,
                                key=("transport", t, d, c, arrive))
    return net
