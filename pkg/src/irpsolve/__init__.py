"""Solver toolkit for the continent-scale multi-commodity inventory routing problem."""

from .model import (
    COST_TOL,
    CostBreakdown,
    InfeasibleDepot,
    Instance,
    InvalidDelivery,
    InvalidRoute,
    Route,
    Solution,
    delta_evaluate,
    evaluate,
    free_capacity,
    make_route,
    route_cost,
    route_timing,
)

__all__ = [
    "COST_TOL",
    "CostBreakdown",
    "InfeasibleDepot",
    "Instance",
    "InvalidDelivery",
    "InvalidRoute",
    "Route",
    "Solution",
    "delta_evaluate",
    "evaluate",
    "free_capacity",
    "make_route",
    "route_cost",
    "route_timing",
]
