"""Event-driven simulation of atomic two-class users over two networks.

Users of each class arrive as a Poisson process, hold an exponentially
distributed connection carrying a fixed per-user throughput, and pick the
network with the lowest perceived cost (latency with their own flow
included, plus sensitivity-weighted tax). Arrivals finding no room on
either network are dropped. With handovers enabled, active sessions keep
best-responding to load and tax changes until no profitable switch
remains. A tax policy recomputes the price on the large network at every
event from the currently carried load.

Runs are deterministic: a config (including its seed) maps to a single
trace. Replications derive their RNG stream from the string
``"{seed}:{index}"``, so paired comparisons across policies share random
numbers when they share the index.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from enum import Enum

from .analytics import (
    Demand,
    FlowAssignment,
    NetworkPair,
    Sensitivities,
    TaxVector,
    delay,
    optimal_assignment,
    optimal_cost,
    tax_rate,
    total_cost,
)

CLASS_A = "A"
CLASS_B = "B"


class TaxPolicy(Enum):
    NONE = "none"
    APPROX = "approx"
    OPTIMAL = "optimal"


@dataclass(frozen=True)
class ClassProfile:
    """Arrival rate (users/min), mean connection duration (min),
    per-user throughput (Mbit/s) and tax sensitivity of one class."""

    arrival_rate: float
    mean_duration: float
    throughput: float
    alpha: float

    def __post_init__(self):
        if self.arrival_rate < 0:
            raise ValueError(f"arrival_rate must be >= 0, got {self.arrival_rate}")
        if self.mean_duration <= 0:
            raise ValueError(f"mean_duration must be > 0, got {self.mean_duration}")
        if self.throughput <= 0:
            raise ValueError(f"throughput must be > 0, got {self.throughput}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")

    @property
    def offered_load(self) -> float:
        """Expected carried throughput lambda * mean_duration * eps."""
        return self.arrival_rate * self.mean_duration * self.throughput


@dataclass(frozen=True)
class SimConfig:
    net: NetworkPair
    class_a: ClassProfile
    class_b: ClassProfile
    handovers: bool
    policy: TaxPolicy
    horizon: float
    warmup: float = 0.0
    seed: int | str = 0
    handover_hysteresis: float = 1e-6
    # None: dynamic cap of 100 sweeps per active session.
    max_handover_rounds: int | None = None

    def __post_init__(self):
        if not self.class_a.alpha > self.class_b.alpha:
            raise ValueError(
                "class A must be the more tax-sensitive one "
                f"(alpha_a={self.class_a.alpha} <= alpha_b={self.class_b.alpha})"
            )
        if not self.horizon > self.warmup >= 0:
            raise ValueError(
                f"requires horizon > warmup >= 0, got {self.horizon}, {self.warmup}"
            )
        if self.handover_hysteresis < 0:
            raise ValueError("handover_hysteresis must be >= 0")

    def profile(self, cls: str) -> ClassProfile:
        return self.class_a if cls == CLASS_A else self.class_b

    @property
    def sensitivities(self) -> Sensitivities:
        return Sensitivities(self.class_a.alpha, self.class_b.alpha)

    @property
    def offered_load(self) -> float:
        return self.class_a.offered_load + self.class_b.offered_load


class SystemState:
    """Active sessions and the per-network, per-class carried throughput.

    Carried loads are always eps * (session count), recomputed from the
    integer counts so no floating-point drift can accumulate.
    """

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.clock = 0.0
        self.sessions: dict[int, list] = {}  # sid -> [cls, network]
        self.counts = {(1, CLASS_A): 0, (1, CLASS_B): 0, (2, CLASS_A): 0, (2, CLASS_B): 0}

    def carried(self, p: int) -> float:
        return (
            self.counts[(p, CLASS_A)] * self.cfg.class_a.throughput
            + self.counts[(p, CLASS_B)] * self.cfg.class_b.throughput
        )

    def total_load(self) -> float:
        return self.carried(1) + self.carried(2)

    def class_load(self, cls: str) -> float:
        return (self.counts[(1, cls)] + self.counts[(2, cls)]) * self.cfg.profile(
            cls
        ).throughput

    def aggregate(self) -> FlowAssignment:
        return FlowAssignment(self.carried(1), self.carried(2))

    def admit(self, sid: int, cls: str, p: int) -> None:
        self.sessions[sid] = [cls, p]
        self.counts[(p, cls)] += 1

    def remove(self, sid: int) -> tuple[str, int]:
        cls, p = self.sessions.pop(sid)
        self.counts[(p, cls)] -= 1
        return cls, p

    def move(self, sid: int, q: int) -> None:
        cls, p = self.sessions[sid]
        self.counts[(p, cls)] -= 1
        self.counts[(q, cls)] += 1
        self.sessions[sid][1] = q


def current_tax(policy: TaxPolicy, state: SystemState, cfg: SimConfig) -> TaxVector:
    """Tax on network 2 for the currently carried load.

    OPTIMAL reads the true class-B carried load to pick the branch; APPROX
    substitutes the long-run average class-B load eps_B * lambda_B / mu_B.
    The magnitude only ever depends on the total load.
    """
    if policy is TaxPolicy.NONE:
        return TaxVector(0.0, 0.0)
    demand_total = state.total_load()
    net = cfg.net
    if demand_total <= net.tax_threshold():
        return TaxVector(0.0, 0.0)
    if policy is TaxPolicy.OPTIMAL:
        d_b = state.class_load(CLASS_B)
    else:
        d_b = cfg.class_b.offered_load
    f2_opt = optimal_assignment(net, demand_total).f2
    alpha = cfg.class_a.alpha if d_b <= f2_opt else cfg.class_b.alpha
    return TaxVector(0.0, tax_rate(net, demand_total, alpha))


def choose_network(
    state: SystemState, cls: str, taxes: TaxVector, net: NetworkPair
) -> int | None:
    """Cheapest network admitting the user (own flow included), or None
    when both are full. Ties go to network 2, the larger one."""
    prof = state.cfg.profile(cls)
    eps, alpha = prof.throughput, prof.alpha
    best, best_cost = None, math.inf
    for p, cap, tau in ((2, net.c2, taxes.tau2), (1, net.c1, taxes.tau1)):
        load = state.carried(p) + eps
        if load >= cap:
            continue
        cost = delay(cap, load) + alpha * tau
        if cost < best_cost:
            best, best_cost = p, cost
    return best


def _wants_switch(
    state: SystemState, cls: str, p: int, taxes: TaxVector, hysteresis: float
) -> bool:
    # All sessions of the same (class, network) face identical costs, so
    # the switch decision is a per-group predicate, not a per-session one.
    net = state.cfg.net
    prof = state.cfg.profile(cls)
    q = 2 if p == 1 else 1
    cap_p, tau_p = (net.c1, taxes.tau1) if p == 1 else (net.c2, taxes.tau2)
    cap_q, tau_q = (net.c1, taxes.tau1) if q == 1 else (net.c2, taxes.tau2)
    moved = state.carried(q) + prof.throughput
    if moved >= cap_q:
        return False
    stay = delay(cap_p, state.carried(p)) + prof.alpha * tau_p
    move = delay(cap_q, moved) + prof.alpha * tau_q
    return move < stay - hysteresis


def handover_relaxation(
    state: SystemState, taxes: TaxVector, cfg: SimConfig
) -> tuple[int, bool]:
    """Sequential best-response sweeps (ascending session id) until a full
    sweep makes no switch or the round cap is hit.

    Returns (total switches, converged). Convergence means no session can
    improve its perceived cost by more than the hysteresis by moving.
    """
    cap = cfg.max_handover_rounds
    if cap is None:
        cap = 100 * max(1, len(state.sessions))
    total = 0
    rounds = 0
    while rounds < cap:
        rounds += 1
        # Cheap fixed-point test before walking the session list.
        if not any(
            state.counts[(p, cls)] > 0
            and _wants_switch(state, cls, p, taxes, cfg.handover_hysteresis)
            for p in (1, 2)
            for cls in (CLASS_A, CLASS_B)
        ):
            return total, True
        switched = 0
        for sid in list(state.sessions):
            cls, p = state.sessions[sid]
            if _wants_switch(state, cls, p, taxes, cfg.handover_hysteresis):
                state.move(sid, 2 if p == 1 else 1)
                switched += 1
        total += switched
        if switched == 0:
            return total, True
    return total, False


@dataclass(frozen=True)
class Sample:
    """State snapshot taken right after one event."""

    t: float
    load: float
    tau2: float
    cost: float
    cost_opt: float
    poa: float
    n1a: int
    n1b: int
    n2a: int
    n2b: int
    event: str


@dataclass
class BlockingStats:
    """Arrival/block counters, whole run and measurement window."""

    arrivals: dict = field(default_factory=lambda: {CLASS_A: 0, CLASS_B: 0})
    blocked: dict = field(default_factory=lambda: {CLASS_A: 0, CLASS_B: 0})
    measured_arrivals: int = 0
    measured_blocked: int = 0

    @property
    def rate(self) -> float:
        if self.measured_arrivals == 0:
            return 0.0
        return self.measured_blocked / self.measured_arrivals


@dataclass
class SimSummary:
    avg_poa: float
    blocking_rate: float
    relaxation_warnings: int


@dataclass
class SimTrace:
    samples: list[Sample]
    blocking: BlockingStats
    summary: SimSummary


def replication_seed(seed: int | str, index: int) -> str:
    """Documented stream-splitting rule for independent replications."""
    return f"{seed}:{index}"


def run(cfg: SimConfig) -> SimTrace:
    """Simulate one trajectory and integrate metrics event by event.

    Taxes are recomputed at every event from the pre-event state and used
    for the admission / handover decisions; the recorded sample carries the
    tax recomputed from the post-event state, which is the one in force
    until the next event. Time averages use exact piecewise-constant
    integration over [warmup, horizon].
    """
    rng = random.Random(str(cfg.seed))
    state = SystemState(cfg)
    samples: list[Sample] = []
    blocking = BlockingStats()
    warnings = 0

    departures: list[tuple[float, int]] = []
    next_sid = 0
    next_arrival = {}
    for cls in (CLASS_A, CLASS_B):
        lam = cfg.profile(cls).arrival_rate
        next_arrival[cls] = rng.expovariate(lam) if lam > 0 else math.inf

    def metrics() -> tuple[float, float, float, float]:
        load = state.total_load()
        if load == 0:
            return 0.0, 0.0, 0.0, 1.0
        cost = total_cost(cfg.net, state.aggregate())
        cost_opt = optimal_cost(cfg.net, load)
        return load, cost, cost_opt, cost / cost_opt

    poa = 1.0
    clock = 0.0
    poa_integral = 0.0

    def advance(to: float) -> None:
        nonlocal poa_integral, clock
        lo = max(clock, cfg.warmup)
        hi = min(to, cfg.horizon)
        if hi > lo:
            poa_integral += poa * (hi - lo)
        clock = to

    while True:
        t_dep = departures[0][0] if departures else math.inf
        t = min(next_arrival[CLASS_A], next_arrival[CLASS_B], t_dep)
        if t > cfg.horizon or t == math.inf:
            advance(cfg.horizon)
            break
        advance(t)
        state.clock = t

        taxes = current_tax(cfg.policy, state, cfg)
        changed = False
        if t_dep <= next_arrival[CLASS_A] and t_dep <= next_arrival[CLASS_B]:
            _, sid = heapq.heappop(departures)
            cls, _p = state.remove(sid)
            event = "dep" + cls
            changed = True
        else:
            cls = CLASS_A if next_arrival[CLASS_A] <= next_arrival[CLASS_B] else CLASS_B
            prof = cfg.profile(cls)
            # Fixed draw order (inter-arrival, then duration), consumed even
            # for blocked arrivals: keeps streams aligned across policies.
            next_arrival[cls] = t + rng.expovariate(prof.arrival_rate)
            duration = rng.expovariate(1.0 / prof.mean_duration)
            in_window = t >= cfg.warmup
            blocking.arrivals[cls] += 1
            if in_window:
                blocking.measured_arrivals += 1
            p = choose_network(state, cls, taxes, cfg.net)
            if p is None:
                blocking.blocked[cls] += 1
                if in_window:
                    blocking.measured_blocked += 1
                event = "blk" + cls
            else:
                state.admit(next_sid, cls, p)
                heapq.heappush(departures, (t + duration, next_sid))
                next_sid += 1
                event = "arr" + cls
                changed = True

        if cfg.handovers and changed:
            _, converged = handover_relaxation(state, taxes, cfg)
            if not converged:
                warnings += 1

        load, cost, cost_opt, poa = metrics()
        tau2_now = current_tax(cfg.policy, state, cfg).tau2
        samples.append(
            Sample(
                t=t,
                load=load,
                tau2=tau2_now,
                cost=cost,
                cost_opt=cost_opt,
                poa=poa,
                n1a=state.counts[(1, CLASS_A)],
                n1b=state.counts[(1, CLASS_B)],
                n2a=state.counts[(2, CLASS_A)],
                n2b=state.counts[(2, CLASS_B)],
                event=event,
            )
        )

    avg_poa = poa_integral / (cfg.horizon - cfg.warmup)
    return SimTrace(
        samples=samples,
        blocking=blocking,
        summary=SimSummary(
            avg_poa=avg_poa,
            blocking_rate=blocking.rate,
            relaxation_warnings=warnings,
        ),
    )


# ---------------------------------------------------------------------------
# Load sweeps


@dataclass(frozen=True)
class SweepRow:
    """Aggregated result of one (load, policy, handover) cell."""

    load: float
    policy: TaxPolicy
    handovers: bool
    mean_poa: float
    se_poa: float
    blocking_rate: float
    replications: int
    poa_values: tuple[float, ...]


def scale_arrival_rates(
    base: SimConfig, load: float, ratio: float
) -> tuple[float, float]:
    """Arrival rates hitting a target normalized offered load at a fixed
    rate ratio lambda_a / lambda_b."""
    if not 0 < load < 1:
        raise ValueError(f"normalized load must be in (0, 1), got {load}")
    if ratio <= 0:
        raise ValueError(f"ratio must be > 0, got {ratio}")
    target = load * base.net.total
    per_lambda_b = (
        ratio * base.class_a.mean_duration * base.class_a.throughput
        + base.class_b.mean_duration * base.class_b.throughput
    )
    lam_b = target / per_lambda_b
    return ratio * lam_b, lam_b


def replication_config(
    base: SimConfig,
    load: float,
    ratio: float,
    policy: TaxPolicy,
    handovers: bool,
    index: int,
) -> SimConfig:
    lam_a, lam_b = scale_arrival_rates(base, load, ratio)
    return SimConfig(
        net=base.net,
        class_a=ClassProfile(
            lam_a, base.class_a.mean_duration, base.class_a.throughput, base.class_a.alpha
        ),
        class_b=ClassProfile(
            lam_b, base.class_b.mean_duration, base.class_b.throughput, base.class_b.alpha
        ),
        handovers=handovers,
        policy=policy,
        horizon=base.horizon,
        warmup=base.warmup,
        seed=replication_seed(base.seed, index),
        handover_hysteresis=base.handover_hysteresis,
        max_handover_rounds=base.max_handover_rounds,
    )


def _run_cell_replication(cfg: SimConfig) -> tuple[float, int, int]:
    trace = run(cfg)
    return (
        trace.summary.avg_poa,
        trace.blocking.measured_arrivals,
        trace.blocking.measured_blocked,
    )


def sweep_load(
    base: SimConfig,
    loads: list[float],
    ratio: float,
    replications: int,
    policies: tuple[TaxPolicy, ...] = (TaxPolicy.NONE, TaxPolicy.APPROX, TaxPolicy.OPTIMAL),
    handover_settings: tuple[bool, ...] = (True, False),
    max_workers: int | None = None,
) -> list[SweepRow]:
    """Run the policy x handover x load x replication matrix.

    Replication i of every cell uses the stream ``"{seed}:{i}"``, so cells
    at the same load are paired through common random numbers. Results are
    aggregated per cell in replication order regardless of how the runs are
    scheduled.
    """
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    cells = [
        (load, policy, handover)
        for load in loads
        for handover in handover_settings
        for policy in policies
    ]
    jobs = [
        replication_config(base, load, ratio, policy, handover, i)
        for (load, policy, handover) in cells
        for i in range(replications)
    ]
    if max_workers is None:
        import os

        max_workers = os.cpu_count() or 1
    if max_workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(_run_cell_replication, jobs, chunksize=1))
    else:
        results = [_run_cell_replication(cfg) for cfg in jobs]

    rows = []
    for k, (load, policy, handover) in enumerate(cells):
        chunk = results[k * replications : (k + 1) * replications]
        poas = tuple(r[0] for r in chunk)
        arrivals = sum(r[1] for r in chunk)
        blocked = sum(r[2] for r in chunk)
        mean = sum(poas) / replications
        if replications > 1:
            var = sum((x - mean) ** 2 for x in poas) / (replications - 1)
            se = math.sqrt(var / replications)
        else:
            se = 0.0
        rows.append(
            SweepRow(
                load=load,
                policy=policy,
                handovers=handover,
                mean_poa=mean,
                se_poa=se,
                blocking_rate=blocked / arrivals if arrivals else 0.0,
                replications=replications,
                poa_values=poas,
            )
        )
    return rows


def pooled_blocking_by_load(
    rows: list[SweepRow], handovers: bool
) -> list[tuple[float, float]]:
    """Blocking rate pooled over policies, per load, for one handover
    setting; (load, rate) pairs sorted by load."""
    by_load: dict[float, list[SweepRow]] = {}
    for row in rows:
        if row.handovers == handovers:
            by_load.setdefault(row.load, []).append(row)
    out = []
    for load in sorted(by_load):
        group = by_load[load]
        out.append((load, sum(r.blocking_rate for r in group) / len(group)))
    return out


def blocking_crossing(points: list[tuple[float, float]], level: float) -> float | None:
    """First load at which the blocking curve crosses ``level``, linearly
    interpolated between grid points; None if it never does."""
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if y0 < level <= y1:
            if y1 == y0:
                return x1
            return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    if points and points[0][1] >= level:
        return points[0][0]
    return None


# ---------------------------------------------------------------------------
# CSV export (9 significant digits for all floats)

TRACE_HEADER = "t,D,tau2,C,C_opt,PoA,n1A,n1B,n2A,n2B,event"
SUMMARY_HEADER = "load,policy,handover,mean_poa,se_poa,blocking_rate,replications"


def _fmt(x: float) -> str:
    return format(x, ".9g")


def write_trace_csv(trace: SimTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(TRACE_HEADER + "\n")
        for s in trace.samples:
            fh.write(
                ",".join(
                    [
                        _fmt(s.t),
                        _fmt(s.load),
                        _fmt(s.tau2),
                        _fmt(s.cost),
                        _fmt(s.cost_opt),
                        _fmt(s.poa),
                        str(s.n1a),
                        str(s.n1b),
                        str(s.n2a),
                        str(s.n2b),
                        s.event,
                    ]
                )
                + "\n"
            )


def write_summary_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        _fmt(r.load),
                        r.policy.value,
                        "true" if r.handovers else "false",
                        _fmt(r.mean_poa),
                        _fmt(r.se_poa),
                        _fmt(r.blocking_rate),
                        str(r.replications),
                    ]
                )
                + "\n"
            )
