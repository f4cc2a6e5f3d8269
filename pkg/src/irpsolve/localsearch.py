"""Routing local search: twelve neighborhoods over timed, loaded routes.

Every candidate move is priced exactly through
:func:`irpsolve.model.delta_evaluate` (routing plus all inventory
effects) and applied only when it strictly lowers the cost, so a search
pass can only improve the solution. Pairwise neighborhoods look at a
sampled share of the route pairs; deletions, merges and the single-route
moves run to a fixpoint, mirroring how the pass order interleaves them.

Within-pass acceptance is first-improvement except for merges, which pick
the best pair of their group each round.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import (COST_TOL, InfeasibleDepot, Instance, InvalidDelivery,
                    InvalidRoute, Route, Solution, delta_evaluate, evaluate,
                    make_route)

MOVE_KINDS = (
    "relocate", "swap", "two_opt_star",
    "insert", "swap_single_depot", "merge", "merge_multi_day",
    "delete_route", "change_day",
    "insert_multi_depot", "swap_multi_depot", "two_opt_star_multi_depot",
)


@dataclass(frozen=True)
class Move:
    kind: str
    route_ids: tuple[int, ...]
    delta: float


class _Search:
    """Mutable route list plus the evaluated solution it induces."""

    def __init__(self, inst: Instance, solution: Solution):
        self.inst = inst
        self.routes: list[Route | None] = list(solution.routes)
        self.solution = solution
        self.moves: list[Move] = []

    def live(self) -> list[int]:
        return [i for i, r in enumerate(self.routes) if r is not None]

    def price(self, idxs, news) -> float | None:
        before = [self.routes[i] for i in idxs]
        after = [r for r in news if r is not None]
        try:
            return delta_evaluate(self.inst, self.solution, before, after)
        except (InfeasibleDepot, InvalidDelivery):
            return None

    def apply(self, kind: str, idxs, news, delta: float):
        expected = self.solution.total_cost + delta
        for i, r in zip(idxs, news):
            self.routes[i] = r
        self.solution = evaluate(self.inst, [r for r in self.routes if r is not None])
        assert abs(self.solution.total_cost - expected) < 1e-6, \
            f"{kind}: delta {delta} disagrees with re-evaluation"
        self.moves.append(Move(kind, tuple(idxs), delta))

    def try_move(self, kind: str, idxs, news) -> bool:
        delta = self.price(idxs, news)
        if delta is None or delta >= -COST_TOL:
            return False
        self.apply(kind, idxs, news, delta)
        return True


def _build(inst, day, path, qty) -> Route | None:
    try:
        return make_route(inst, day, path, qty)
    except InvalidRoute:
        return None


# ---------------------------------------------------------------------------
# Candidate generators. Each yields (idxs, news) with news aligned to idxs
# (None meaning the slot empties). Generators read the *current* routes.


def _relocate_candidates(state: _Search, i: int):
    r = state.routes[i]
    k = r.n_stops
    for s_from in range(k):
        for s_to in range(k):
            if s_to == s_from:
                continue
            stops = list(r.stops)
            qty = list(r.quantities)
            c, q = stops.pop(s_from), qty.pop(s_from)
            stops.insert(s_to, c)
            qty.insert(s_to, q)
            new = _build(state.inst, r.day, (r.depot, *stops), qty)
            if new is not None:
                yield (i,), (new,)


def _swap_candidates(state: _Search, i: int):
    r = state.routes[i]
    k = r.n_stops
    for s1 in range(k):
        for s2 in range(s1 + 1, k):
            stops = list(r.stops)
            qty = list(r.quantities)
            stops[s1], stops[s2] = stops[s2], stops[s1]
            qty[s1], qty[s2] = qty[s2], qty[s1]
            new = _build(state.inst, r.day, (r.depot, *stops), qty)
            if new is not None:
                yield (i,), (new,)


def _two_opt_star_candidates(state: _Search, i: int):
    """Reverse a middle section of the stop sequence."""
    r = state.routes[i]
    k = r.n_stops
    for a in range(k):
        for b in range(a + 1, k):
            stops = list(r.stops)
            qty = list(r.quantities)
            stops[a:b + 1] = reversed(stops[a:b + 1])
            qty[a:b + 1] = reversed(qty[a:b + 1])
            new = _build(state.inst, r.day, (r.depot, *stops), qty)
            if new is not None:
                yield (i,), (new,)


def _stop_transfer_candidates(state: _Search, i: int, j: int):
    """Move one stop (with its whole load) from route i to route j."""
    inst = state.inst
    ri, rj = state.routes[i], state.routes[j]
    for s in range(ri.n_stops):
        c, q = ri.stops[s], ri.quantities[s]
        if c in rj.stops:
            continue
        donor_stops = ri.stops[:s] + ri.stops[s + 1:]
        donor_qty = ri.quantities[:s] + ri.quantities[s + 1:]
        new_i = (_build(inst, ri.day, (ri.depot, *donor_stops), donor_qty)
                 if donor_stops else None)
        if donor_stops and new_i is None:
            continue
        for pos in range(rj.n_stops + 1):
            stops = rj.stops[:pos] + (c,) + rj.stops[pos:]
            qty = rj.quantities[:pos] + (q,) + rj.quantities[pos:]
            new_j = _build(inst, rj.day, (rj.depot, *stops), qty)
            if new_j is not None:
                yield (i, j), (new_i, new_j)


def _stop_exchange_candidates(state: _Search, i: int, j: int):
    """Swap one stop of route i against one stop of route j, loads attached."""
    inst = state.inst
    ri, rj = state.routes[i], state.routes[j]
    for si in range(ri.n_stops):
        for sj in range(rj.n_stops):
            ci, cj = ri.stops[si], rj.stops[sj]
            if ci == cj or cj in ri.stops or ci in rj.stops:
                continue
            stops_i = list(ri.stops)
            qty_i = list(ri.quantities)
            stops_j = list(rj.stops)
            qty_j = list(rj.quantities)
            stops_i[si], qty_i[si] = cj, rj.quantities[sj]
            stops_j[sj], qty_j[sj] = ci, ri.quantities[si]
            new_i = _build(inst, ri.day, (ri.depot, *stops_i), qty_i)
            new_j = _build(inst, rj.day, (rj.depot, *stops_j), qty_j)
            if new_i is not None and new_j is not None:
                yield (i, j), (new_i, new_j)


def _tail_exchange_candidates(state: _Search, i: int, j: int):
    """Cut both routes in two and swap the end parts."""
    inst = state.inst
    ri, rj = state.routes[i], state.routes[j]
    for a in range(ri.n_stops + 1):
        for b in range(rj.n_stops + 1):
            if a == ri.n_stops and b == rj.n_stops:
                continue  # nothing moves
            head_i, tail_i = ri.stops[:a], ri.stops[a:]
            head_j, tail_j = rj.stops[:b], rj.stops[b:]
            stops_i = head_i + tail_j
            stops_j = head_j + tail_i
            if set(stops_i) & set(stops_j):
                continue
            qty_i = ri.quantities[:a] + rj.quantities[b:]
            qty_j = rj.quantities[:b] + ri.quantities[a:]
            new_i = (_build(inst, ri.day, (ri.depot, *stops_i), qty_i)
                     if stops_i else None)
            new_j = (_build(inst, rj.day, (rj.depot, *stops_j), qty_j)
                     if stops_j else None)
            if stops_i and new_i is None:
                continue
            if stops_j and new_j is None:
                continue
            if new_i is None and new_j is None:
                continue
            yield (i, j), (new_i, new_j)


def _merge_candidates(state: _Search, i: int, j: int, multi_day: bool):
    inst = state.inst
    ri, rj = state.routes[i], state.routes[j]
    if ri.depot != rj.depot:
        return
    if not multi_day and ri.day != rj.day:
        return
    day = min(ri.day, rj.day)
    if set(ri.stops) & set(rj.stops):
        return
    for first, second in ((ri, rj), (rj, ri)):
        stops = first.stops + second.stops
        qty = first.quantities + second.quantities
        new = _build(inst, day, (ri.depot, *stops), qty)
        if new is not None:
            yield (i, j), (new, None)


def _change_day_candidates(state: _Search, i: int):
    r = state.routes[i]
    for day in (r.day - 1, r.day + 1):
        if not 1 <= day <= state.inst.horizon:
            continue
        new = _build(state.inst, day, r.path, r.quantities)
        if new is not None:
            yield (i,), (new,)


# ---------------------------------------------------------------------------
# Pass drivers


def _sample_pairs(rng: random.Random, idxs: list[int], p: float) -> list[tuple[int, int]]:
    pairs = [(a, b) for n, a in enumerate(idxs) for b in idxs[n + 1:]]
    if not pairs:
        return []
    k = min(len(pairs), max(1, round(len(pairs) * p / 100.0)))
    return rng.sample(pairs, k)


def _pair_pass(state: _Search, kind: str, pairs, candidates, directed: bool):
    for i, j in pairs:
        if state.routes[i] is None or state.routes[j] is None:
            continue
        orderings = ((i, j), (j, i)) if directed else ((i, j),)
        done = False
        for a, b in orderings:
            for idxs, news in candidates(state, a, b):
                if state.try_move(kind, idxs, news):
                    done = True
                    break
            if done:
                break


def _delete_until_stable(state: _Search):
    improved = True
    while improved:
        improved = False
        order = sorted(state.live(),
                       key=lambda i: (state.routes[i].day, state.routes[i].depot, i))
        for i in order:
            if state.routes[i] is None:
                continue
            if state.try_move("delete_route", (i,), (None,)):
                improved = True


def _merge_until_stable(state: _Search, kind: str, multi_day: bool):
    while True:
        groups: dict[tuple, list[int]] = {}
        for i in state.live():
            r = state.routes[i]
            key = (r.depot,) if multi_day else (r.day, r.depot)
            groups.setdefault(key, []).append(i)
        best = None
        for key in sorted(groups):
            members = groups[key]
            for n, i in enumerate(members):
                for j in members[n + 1:]:
                    for idxs, news in _merge_candidates(state, i, j, multi_day):
                        delta = state.price(idxs, news)
                        if delta is not None and delta < -COST_TOL and \
                                (best is None or delta < best[0] - 1e-12):
                            best = (delta, idxs, news)
        if best is None:
            return
        delta, idxs, news = best
        state.apply(kind, idxs, news, delta)


def _single_route_until_stable(state: _Search):
    improved = True
    while improved:
        improved = False
        for i in state.live():
            if state.routes[i] is None:
                continue
            for gen, kind in ((_relocate_candidates, "relocate"),
                              (_swap_candidates, "swap"),
                              (_two_opt_star_candidates, "two_opt_star")):
                moved = True
                while moved:
                    moved = False
                    for idxs, news in gen(state, i):
                        if state.try_move(kind, idxs, news):
                            moved = True
                            improved = True
                            break


def _change_day_until_stable(state: _Search):
    improved = True
    while improved:
        improved = False
        for i in state.live():
            if state.routes[i] is None:
                continue
            moved = True
            while moved:
                moved = False
                for idxs, news in _change_day_candidates(state, i):
                    if state.try_move("change_day", idxs, news):
                        moved = True
                        improved = True
                        break


def _grouped_pairs(state: _Search, rng: random.Random, p: float):
    groups: dict[tuple, list[int]] = {}
    for i in state.live():
        r = state.routes[i]
        groups.setdefault((r.day, r.depot), []).append(i)
    pairs: list[tuple[int, int]] = []
    for key in sorted(groups):
        pairs.extend(_sample_pairs(rng, groups[key], p))
    return pairs


def routing_local_search(inst: Instance, solution: Solution, n_it: int = 1,
                         p: float = 10.0, rng: random.Random | None = None,
                         collect_moves: list | None = None) -> Solution:
    """Run ``n_it`` sweeps of the full neighborhood schedule.

    ``p`` is the percentage of route pairs sampled for the pairwise
    neighborhoods; sampling draws from ``rng`` so equal seeds replay
    identically. The returned solution never costs more than the input.
    """
    if not 0 < p <= 100:
        raise ValueError("p must be a percentage in (0, 100]")
    rng = rng if rng is not None else random.Random(0)
    state = _Search(inst, solution)
    for _ in range(n_it):
        live = state.live()
        _pair_pass(state, "insert_multi_depot", _sample_pairs(rng, live, p),
                   _stop_transfer_candidates, directed=True)
        _pair_pass(state, "swap_multi_depot", _sample_pairs(rng, state.live(), p),
                   _stop_exchange_candidates, directed=False)
        _delete_until_stable(state)
        _pair_pass(state, "two_opt_star_multi_depot",
                   _sample_pairs(rng, state.live(), p),
                   _tail_exchange_candidates, directed=False)
        _delete_until_stable(state)
        _merge_until_stable(state, "merge", multi_day=False)
        _merge_until_stable(state, "merge_multi_day", multi_day=True)
        _delete_until_stable(state)
        _pair_pass(state, "insert", _grouped_pairs(state, rng, p),
                   _stop_transfer_candidates, directed=True)
        _pair_pass(state, "swap_single_depot", _grouped_pairs(state, rng, p),
                   _stop_exchange_candidates, directed=False)
        _single_route_until_stable(state)
        _change_day_until_stable(state)
    if collect_moves is not None:
        collect_moves.extend(state.moves)
    return state.solution
