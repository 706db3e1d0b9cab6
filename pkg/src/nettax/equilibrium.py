"""Two-class Wardrop equilibrium under an arbitrary tax vector.

The fluid game: each class i in {A, B} places its demand d_i on the two
links so that every link actually used by class i has minimal perceived
cost latency + alpha_i * tau_p. With two links the equilibrium aggregate
split is pinned down by the latency gap

    g(f1) = l1(f1) - l2(D - f1),

which is strictly increasing in f1, against the per-class indifference
levels t_i = alpha_i * (tau2 - tau1). The solver enumerates the candidate
support patterns in a fixed order (the more price-averse class migrates to
the cheaper-taxed link first) and returns the first one that satisfies the
equilibrium inequalities; g(f1) = t has a closed-form root, so no
iteration is needed except in a defensive bisection fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytics import (
    Demand,
    FlowAssignment,
    NetworkPair,
    Sensitivities,
    TaxVector,
    delay,
    optimal_assignment,
    optimal_tax,
    total_cost,
    wardrop_no_tax,
    _check_demand,
)

NAN = float("nan")


class NoEquilibriumFound(RuntimeError):
    """No candidate support validated: a solver bug, not a model state
    (an equilibrium always exists for this game)."""


@dataclass(frozen=True)
class ClassFlowSplit:
    """Per-class, per-network flows (Mbit/s): f<p>_<class>."""

    f1_a: float
    f1_b: float
    f2_a: float
    f2_b: float

    def __post_init__(self):
        for v in (self.f1_a, self.f1_b, self.f2_a, self.f2_b):
            if v < 0:
                raise ValueError(f"class flows must be >= 0, got {self}")

    @property
    def f1(self) -> float:
        return self.f1_a + self.f1_b

    @property
    def f2(self) -> float:
        return self.f2_a + self.f2_b

    def aggregate(self) -> FlowAssignment:
        return FlowAssignment(self.f1, self.f2)

    def class_totals(self) -> tuple[float, float]:
        return (self.f1_a + self.f2_a, self.f1_b + self.f2_b)


@dataclass(frozen=True)
class EquilibriumReport:
    """Solver output plus the diagnostics needed to audit it.

    ``residual`` is the largest violation of the equilibrium inequalities
    found over all (network, class) pairs carrying flow; the solver
    guarantees it does not exceed the tolerance it was called with.

    Only the aggregate flows are contract-bearing at zero tax: the class
    decomposition is not unique there, and the solver reports the split
    proportional to demand.
    """

    split: ClassFlowSplit
    latencies: tuple[float, float]
    cost_a: tuple[float, float]
    cost_b: tuple[float, float]
    residual: float


def _gap(net: NetworkPair, demand_total: float, f1: float) -> float:
    """Latency gap l1(f1) - l2(D - f1); +-inf at the saturation edges."""
    l1 = delay(net.c1, f1) if f1 < net.c1 else math.inf
    f2 = demand_total - f1
    l2 = delay(net.c2, f2) if f2 < net.c2 else math.inf
    if l1 == math.inf:
        return math.inf
    if l2 == math.inf:
        return -math.inf
    return l1 - l2


def _solve_gap(net: NetworkPair, demand_total: float, t: float) -> float:
    """Aggregate f1 with l1(f1) - l2(D - f1) = t, in closed form.

    With a = c1 - f1 and s = c1 + c2 - D the condition is the quadratic
    t*a^2 - (t*s + 2)*a + s = 0 whose root in (0, s) is written in the
    subtraction-free form below (exact at t = 0).
    """
    s = net.c1 + net.c2 - demand_total
    u = t * s
    a = 2.0 * s / ((u + 2.0) + math.sqrt(u * u + 4.0))
    f1 = net.c1 - a
    return min(max(f1, 0.0), demand_total)


def _residual(
    net: NetworkPair,
    sens: Sensitivities,
    taxes: TaxVector,
    split: ClassFlowSplit,
    support_tol: float,
) -> float:
    l1 = delay(net.c1, split.f1)
    l2 = delay(net.c2, split.f2)
    worst = 0.0
    for flows, alpha in (
        ((split.f1_a, split.f2_a), sens.alpha_a),
        ((split.f1_b, split.f2_b), sens.alpha_b),
    ):
        cost1 = l1 + alpha * taxes.tau1
        cost2 = l2 + alpha * taxes.tau2
        if flows[0] > support_tol:
            worst = max(worst, cost1 - cost2)
        if flows[1] > support_tol:
            worst = max(worst, cost2 - cost1)
    return max(worst, 0.0)


def _report(
    net: NetworkPair,
    sens: Sensitivities,
    taxes: TaxVector,
    split: ClassFlowSplit,
    support_tol: float,
) -> EquilibriumReport:
    l1 = delay(net.c1, split.f1)
    l2 = delay(net.c2, split.f2)
    return EquilibriumReport(
        split=split,
        latencies=(l1, l2),
        cost_a=(l1 + sens.alpha_a * taxes.tau1, l2 + sens.alpha_a * taxes.tau2),
        cost_b=(l1 + sens.alpha_b * taxes.tau1, l2 + sens.alpha_b * taxes.tau2),
        residual=_residual(net, sens, taxes, split, support_tol),
    )


def _clip(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


def _candidate_splits(
    net: NetworkPair,
    dem: Demand,
    t_a: float,
    t_b: float,
) -> list[ClassFlowSplit]:
    """Candidate supports, ordered so that the class with the higher
    indifference level (the one the tax difference pushes toward network 1)
    fills network 1 first. Infeasible aggregates are skipped; the caller
    validates each candidate against the equilibrium inequalities."""
    demand_total = dem.total()
    slack = 1e-12 * max(1.0, demand_total)
    if t_a >= t_b:
        d_x, d_y, t_x, t_y = dem.d_a, dem.d_b, t_a, t_b
    else:
        d_x, d_y, t_x, t_y = dem.d_b, dem.d_a, t_b, t_a

    cands: list[tuple[float, float]] = []  # (f1_x, f1_y)
    # X splits, Y entirely on network 2.
    f1 = _solve_gap(net, demand_total, t_x)
    if f1 <= d_x + slack:
        cands.append((_clip(f1, 0.0, d_x), 0.0))
    # X entirely on network 1, Y entirely on network 2.
    cands.append((d_x, 0.0))
    # Y splits, X entirely on network 1.
    f1 = _solve_gap(net, demand_total, t_y)
    if f1 >= d_x - slack:
        cands.append((d_x, _clip(f1 - d_x, 0.0, d_y)))
    # Everything on network 2.
    if demand_total < net.c2:
        cands.append((0.0, 0.0))
    # Everything on network 1.
    if demand_total < net.c1:
        cands.append((d_x, d_y))

    out = []
    for f1_x, f1_y in cands:
        if t_a >= t_b:
            f1_a, f1_b = f1_x, f1_y
        else:
            f1_a, f1_b = f1_y, f1_x
        out.append(
            ClassFlowSplit(
                f1_a=f1_a,
                f1_b=f1_b,
                f2_a=max(dem.d_a - f1_a, 0.0),
                f2_b=max(dem.d_b - f1_b, 0.0),
            )
        )
    return out


def _bisect_gap(net: NetworkPair, demand_total: float, t: float) -> float:
    # Defensive fallback; the closed-form root normally never fails.
    lo = max(0.0, demand_total - net.c2) + 1e-15
    hi = min(demand_total, net.c1) - 1e-15
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _gap(net, demand_total, mid) < t:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def taxed_equilibrium(
    net: NetworkPair,
    dem: Demand,
    sens: Sensitivities,
    taxes: TaxVector,
    tol: float = 1e-9,
) -> EquilibriumReport:
    """Equilibrium flows of the two-class game under the given taxes.

    Every (network, class) pair carrying more than ``tol`` flow has
    perceived cost within ``tol`` (scaled by the latency magnitude) of the
    cheapest alternative. At zero tax difference the class decomposition is
    reported proportional to demand; only aggregates are unique there.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    demand_total = dem.total()
    _check_demand(net, demand_total)

    if demand_total == 0:
        split = ClassFlowSplit(0.0, 0.0, 0.0, 0.0)
        return _report(net, sens, taxes, split, tol)

    dtau = taxes.tau2 - taxes.tau1
    if dtau == 0:
        agg = wardrop_no_tax(net, demand_total)
        share_a = dem.d_a / demand_total
        split = ClassFlowSplit(
            f1_a=agg.f1 * share_a,
            f1_b=agg.f1 * (1.0 - share_a),
            f2_a=agg.f2 * share_a,
            f2_b=agg.f2 * (1.0 - share_a),
        )
        return _report(net, sens, taxes, split, tol)

    t_a = sens.alpha_a * dtau
    t_b = sens.alpha_b * dtau
    best = None
    for split in _candidate_splits(net, dem, t_a, t_b):
        rep = _report(net, sens, taxes, split, tol)
        scale = max(1.0, *(v for v in rep.latencies if math.isfinite(v)))
        if rep.residual <= tol * scale:
            return rep
        if best is None or rep.residual < best.residual:
            best = rep

    # Iterative fallback (ties / pathological roundoff), tolerance 1e-6.
    for t in (t_a, t_b):
        f1 = _bisect_gap(net, demand_total, t)
        f1_a = _clip(f1, max(0.0, f1 - dem.d_b), min(dem.d_a, f1))
        split = ClassFlowSplit(
            f1_a=f1_a,
            f1_b=f1 - f1_a,
            f2_a=max(dem.d_a - f1_a, 0.0),
            f2_b=max(dem.d_b - (f1 - f1_a), 0.0),
        )
        rep = _report(net, sens, taxes, split, max(tol, 1e-6))
        scale = max(1.0, *(v for v in rep.latencies if math.isfinite(v)))
        if rep.residual <= max(tol, 1e-6) * scale:
            return rep

    raise NoEquilibriumFound(
        f"no support pattern validated (best residual {best.residual if best else NAN})"
    )


def verify_proposition1(
    net: NetworkPair,
    dem: Demand,
    sens: Sensitivities,
    tol: float = 1e-6,
) -> tuple[bool, tuple[float, float]]:
    """Check that the optimal tax really drives the equilibrium aggregates
    to the optimal split; returns (ok, per-network flow discrepancies)."""
    taxes = optimal_tax(net, dem, sens)
    rep = taxed_equilibrium(net, dem, sens, taxes, tol=min(tol, 1e-9))
    opt = optimal_assignment(net, dem.total())
    df1 = rep.split.f1 - opt.f1
    df2 = rep.split.f2 - opt.f2
    return (max(abs(df1), abs(df2)) <= tol, (df1, df2))


def class_latencies(
    net: NetworkPair,
    demand_total: float,
    share_a: float,
    sens: Sensitivities,
) -> tuple[float, float, float]:
    """Flow-weighted average latency of each class under the optimal tax,
    plus the common latency of the no-tax equilibrium for reference.

    An empty class gets NaN (no user experiences a latency).
    """
    if not 0.0 <= share_a <= 1.0:
        raise ValueError(f"share_a must be in [0, 1], got {share_a}")
    _check_demand(net, demand_total)
    d_a = share_a * demand_total
    dem = Demand(d_a, demand_total - d_a)
    taxes = optimal_tax(net, dem, sens)
    rep = taxed_equilibrium(net, dem, sens, taxes)
    l1, l2 = rep.latencies

    def weighted(fl1: float, fl2: float) -> float:
        d = fl1 + fl2
        if d <= 0:
            return NAN
        return (fl1 * l1 + fl2 * l2) / d

    lat_a = weighted(rep.split.f1_a, rep.split.f2_a)
    lat_b = weighted(rep.split.f1_b, rep.split.f2_b)
    if demand_total > 0:
        lat_no_tax = total_cost(net, wardrop_no_tax(net, demand_total)) / demand_total
    else:
        lat_no_tax = NAN
    return (lat_a, lat_b, lat_no_tax)
