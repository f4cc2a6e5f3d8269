import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from irpsolve.io import generate_instance, micro_instance
from irpsolve.model import Instance


@pytest.fixture
def m1() -> Instance:
    return micro_instance()


def small_instance(seed: int, *, n_depots=2, n_customers=5, n_commodities=2,
                   horizon=5, **kwargs) -> Instance:
    """A quick desk-sized instance for unit tests."""
    kwargs.setdefault("width_km", 900.0)
    kwargs.setdefault("height_km", 600.0)
    kwargs.setdefault("vehicle_length", 12)
    kwargs.setdefault("max_item_length", 3)
    return generate_instance(seed, n_depots, n_customers, n_commodities,
                             horizon, **kwargs)


@pytest.fixture
def small(request) -> Instance:
    return small_instance(getattr(request, "param", 0))


def micro_oracle_instance(seed: int) -> Instance:
    """Seeded micro instance whose true optimum needs at most two vehicles.

    Guard rails: one vehicle can carry the whole demand, and a vehicle
    costs more than any inventory saving an extra vehicle could unlock, so
    exhaustive enumeration over route sets of size <= 2 finds the optimum.
    Instances breaking a guard rail (or too big to enumerate) are redrawn
    deterministically.
    """
    rng = np.random.default_rng(seed)
    for attempt in range(40):
        n_comm = int(rng.integers(1, 3))
        horizon = int(rng.integers(2, 4))
        inst = generate_instance(
            seed * 1000 + attempt + 1_000_000,
            n_depots=1, n_customers=2, n_commodities=n_comm, horizon=horizon,
            width_km=700.0, height_km=500.0, speed_kmh=60.0, tau_max=9.0,
            vehicle_length=40, max_item_length=3,
            demand_density=0.35, demand_mean=1.0, cover_ratio=1.3,
            initial_cover_days=1, customer_capacity_days=1.5,
            cost_vehicle=150.0, cost_stop=20.0, cost_km=0.5,
        )
        total_units = int(inst.demand.sum())
        per_pair_cap = int(inst.demand[:, :, 1:].sum(axis=2).max())
        load = int((inst.demand[:, :, 1:].sum(axis=(1, 2)) * inst.lengths).sum())
        enumerable = per_pair_cap <= (3 if n_comm == 1 else 2) and total_units <= 8
        one_vehicle_fits = load <= inst.vehicle_length
        vehicle_dominates = inst.cost_vehicle > (
            inst.horizon * float(inst.excess_cost.max()) * total_units)
        if enumerable and one_vehicle_fits and vehicle_dominates:
            return inst
    raise RuntimeError(f"no enumerable micro instance found for seed {seed}")
