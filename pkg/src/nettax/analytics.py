"""Closed forms for selfish flow placement over two parallel M/M/1 links.

Two access networks with capacities c1 < c2 serve an aggregate throughput
demand D placed by self-interested users. A user of price sensitivity
alpha perceives the cost of network p as latency(p) + alpha * tau_p,
where tau_p is a per-unit tax. This module holds the scalar formulas:
M/M/1 latency, total delay, the no-tax Wardrop equilibrium, the socially
optimal split and its cost, the demand threshold below which no tax is
needed, and the tax on the large network that makes the selfish outcome
optimal for a two-class population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf

# Absolute tolerance for floating-point feasibility checks.
DEFAULT_TOL = 1e-9


class DemandExceedsCapacity(ValueError):
    """Total demand at or above the combined capacity of both networks."""


@dataclass(frozen=True)
class NetworkPair:
    """Capacities (Mbit/s) of the two access networks, ordered c2 > c1."""

    c1: float
    c2: float

    def __post_init__(self):
        if not (self.c2 > self.c1 > 0):
            raise ValueError(
                f"requires c2 > c1 > 0, got c1={self.c1}, c2={self.c2}"
            )

    @property
    def total(self) -> float:
        return self.c1 + self.c2

    def tax_threshold(self) -> float:
        """Demand level below which the selfish split is already optimal."""
        return self.c2 - math.sqrt(self.c1 * self.c2)


@dataclass(frozen=True)
class Sensitivities:
    """Per-class tax sensitivities; class A is the more price-averse one."""

    alpha_a: float
    alpha_b: float

    def __post_init__(self):
        if not (self.alpha_a > self.alpha_b > 0):
            raise ValueError(
                f"requires alpha_a > alpha_b > 0, got {self.alpha_a}, {self.alpha_b}"
            )


@dataclass(frozen=True)
class Demand:
    """Aggregate per-class throughput demand (Mbit/s).

    Zero class demand is allowed: an empty class reduces the game to the
    homogeneous single-class case (the simulator transiently produces it).
    """

    d_a: float
    d_b: float

    def __post_init__(self):
        if self.d_a < 0 or self.d_b < 0:
            raise ValueError(f"demands must be >= 0, got {self.d_a}, {self.d_b}")

    def total(self) -> float:
        return self.d_a + self.d_b


@dataclass(frozen=True)
class FlowAssignment:
    """Aggregate flow (Mbit/s) placed on each network."""

    f1: float
    f2: float

    def __post_init__(self):
        if self.f1 < 0 or self.f2 < 0:
            raise ValueError(f"flows must be >= 0, got {self.f1}, {self.f2}")

    def is_feasible_for(self, demand_total: float, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.f1 + self.f2 - demand_total) <= tol * max(1.0, demand_total)


@dataclass(frozen=True)
class TaxVector:
    """Per-unit prices on the two networks.

    Every shipped policy keeps tau1 = 0; the type stays general so the
    equilibrium solver can be exercised with arbitrary price pairs.
    """

    tau1: float = 0.0
    tau2: float = 0.0

    def __post_init__(self):
        if self.tau1 < 0 or self.tau2 < 0:
            raise ValueError(f"taxes must be >= 0, got {self.tau1}, {self.tau2}")


def delay(c: float, f: float) -> float:
    """M/M/1 sojourn time 1/(c - f); +inf at or beyond capacity.

    Infinity is a legal return value, never an error: it keeps the cost
    functions total on the whole feasible simplex boundary.
    """
    if c <= 0:
        raise ValueError(f"capacity must be > 0, got {c}")
    if f < 0:
        raise ValueError(f"flow must be >= 0, got {f}")
    if f >= c:
        return INF
    return 1.0 / (c - f)


def _link_cost(c: float, f: float) -> float:
    # 0 * inf == 0: a saturated link carrying no flow contributes nothing.
    if f == 0:
        return 0.0
    return f * delay(c, f)


def total_cost(net: NetworkPair, f: FlowAssignment) -> float:
    """Total delay f1*l1(f1) + f2*l2(f2) experienced across both links."""
    return _link_cost(net.c1, f.f1) + _link_cost(net.c2, f.f2)


def _check_demand(net: NetworkPair, demand_total: float) -> None:
    if demand_total < 0:
        raise ValueError(f"demand must be >= 0, got {demand_total}")
    if demand_total >= net.total:
        raise DemandExceedsCapacity(
            f"total demand {demand_total} >= combined capacity {net.total}"
        )


def wardrop_no_tax(net: NetworkPair, demand_total: float) -> FlowAssignment:
    """Unique selfish (equal-latency) split of the total demand, no taxes."""
    _check_demand(net, demand_total)
    if demand_total <= net.c2 - net.c1:
        return FlowAssignment(0.0, demand_total)
    f1 = (demand_total + net.c1 - net.c2) / 2.0
    f2 = (demand_total + net.c2 - net.c1) / 2.0
    return FlowAssignment(f1, f2)


def optimal_assignment(net: NetworkPair, demand_total: float) -> FlowAssignment:
    """Unique split minimizing total delay over the feasible simplex."""
    _check_demand(net, demand_total)
    if demand_total <= net.tax_threshold():
        return FlowAssignment(0.0, demand_total)
    r1, r2 = math.sqrt(net.c1), math.sqrt(net.c2)
    f1 = ((demand_total - net.c2) * r1 + net.c1 * r2) / (r1 + r2)
    f2 = ((demand_total - net.c1) * r2 + net.c2 * r1) / (r1 + r2)
    # Clamp roundoff just above the branch boundary.
    f1 = max(0.0, f1)
    f2 = min(f2, demand_total)
    return FlowAssignment(f1, f2)


def optimal_cost(net: NetworkPair, demand_total: float) -> float:
    """Minimum achievable total delay for the given demand."""
    _check_demand(net, demand_total)
    if demand_total <= net.tax_threshold():
        if demand_total == 0:
            return 0.0
        return demand_total / (net.c2 - demand_total)
    root = math.sqrt(net.c1 * net.c2)
    return (2.0 * demand_total - net.c1 - net.c2 + 2.0 * root) / (
        net.c1 + net.c2 - demand_total
    )


def tax_threshold(net: NetworkPair) -> float:
    return net.tax_threshold()


def tax_rate(net: NetworkPair, demand_total: float, alpha: float) -> float:
    """Tax on network 2 aligning selfish choices of an alpha-sensitive
    marginal class with the optimal split; 0 at or below the threshold."""
    _check_demand(net, demand_total)
    if demand_total <= net.tax_threshold():
        return 0.0
    return (net.c2 - net.c1) / (
        alpha * math.sqrt(net.c1 * net.c2) * (net.c1 + net.c2 - demand_total)
    )


def optimal_tax(net: NetworkPair, dem: Demand, sens: Sensitivities) -> TaxVector:
    """Tax vector (0, tau2) driving the two-class equilibrium to the optimum.

    The magnitude depends only on the total demand; only the branch (which
    class ends up marginal on network 2) needs the class-B demand, through
    the sign of d_b - f2_opt. The tie d_b == f2_opt uses the class-A branch.
    """
    demand_total = dem.total()
    _check_demand(net, demand_total)
    if demand_total <= net.tax_threshold():
        return TaxVector(0.0, 0.0)
    f2_opt = optimal_assignment(net, demand_total).f2
    alpha = sens.alpha_a if dem.d_b <= f2_opt else sens.alpha_b
    return TaxVector(0.0, tax_rate(net, demand_total, alpha))
