import math
import random

import pytest

from nettax.analytics import (
    Demand,
    NetworkPair,
    Sensitivities,
    TaxVector,
    delay,
    optimal_assignment,
    optimal_tax,
    wardrop_no_tax,
)
from nettax.equilibrium import (
    ClassFlowSplit,
    class_latencies,
    taxed_equilibrium,
    verify_proposition1,
)

from oracles import wardrop_grid_oracle

NET = NetworkPair(4, 11)
SENS = Sensitivities(2, 1)


def test_class_flow_split_helpers():
    split = ClassFlowSplit(1, 0.5, 2, 3.5)
    assert split.f1 == 1.5
    assert split.f2 == 5.5
    assert split.class_totals() == (3.0, 4.0)
    with pytest.raises(ValueError):
        ClassFlowSplit(-1, 0, 0, 0)


class TestTaxedEquilibrium:
    def test_optimal_tax_reaches_optimal_flows(self):
        taxes = optimal_tax(NET, Demand(7, 1), SENS)
        rep = taxed_equilibrium(NET, Demand(7, 1), SENS, taxes)
        opt = optimal_assignment(NET, 8)
        assert rep.split.f1 == pytest.approx(opt.f1, abs=1e-9)
        assert rep.split.f2 == pytest.approx(opt.f2, abs=1e-9)
        # the delay-sensitive class stays entirely on the fast network
        assert rep.split.f1_b == 0.0
        assert rep.split.f2_b == pytest.approx(1.0)
        assert rep.residual <= 1e-9

    def test_zero_tax_collapses_to_no_tax_equilibrium(self):
        rep = taxed_equilibrium(NET, Demand(4, 4), SENS, TaxVector(0, 0))
        assert rep.split.f1 == pytest.approx(0.5, abs=1e-12)
        assert rep.split.f2 == pytest.approx(7.5, abs=1e-12)
        # proportional class decomposition of the aggregates
        assert rep.split.f1_a == pytest.approx(0.25, abs=1e-12)
        assert rep.split.f1_b == pytest.approx(0.25, abs=1e-12)

    def test_single_class_heavy_tax(self):
        # only class B present; a big price on network 2 pushes it to 1
        rep = taxed_equilibrium(NET, Demand(0, 5), SENS, TaxVector(0, 10))
        assert rep.split.f1_a == 0.0 and rep.split.f2_a == 0.0
        l1 = delay(NET.c1, rep.split.f1)
        l2 = delay(NET.c2, rep.split.f2)
        if rep.split.f1_b > 1e-9 and rep.split.f2_b > 1e-9:
            assert l1 == pytest.approx(l2 + 1 * 10, rel=1e-9)
        assert rep.residual <= 1e-9

    def test_zero_demand(self):
        rep = taxed_equilibrium(NET, Demand(0, 0), SENS, TaxVector(0, 1))
        assert rep.split == ClassFlowSplit(0, 0, 0, 0)

    def test_zero_tax_any_split_matches_aggregates(self):
        for d_a in (0.0, 2.0, 8.0):
            dem = Demand(d_a, 8.0 - d_a)
            rep = taxed_equilibrium(NET, dem, SENS, TaxVector(0, 0))
            agg = wardrop_no_tax(NET, 8.0)
            assert rep.split.f1 == pytest.approx(agg.f1, abs=1e-12)
            assert rep.split.f2 == pytest.approx(agg.f2, abs=1e-12)

    def test_network1_taxed_instead(self):
        # tau1 > tau2 pushes everyone toward network 2 first
        rep = taxed_equilibrium(NET, Demand(3, 3), SENS, TaxVector(0.5, 0.0))
        assert rep.split.f1 == pytest.approx(0.0, abs=1e-9)
        assert rep.residual <= 1e-9


class TestProposition1:
    def test_branch_a(self):
        ok, (df1, df2) = verify_proposition1(NET, Demand(7, 1), SENS, tol=1e-6)
        assert ok, (df1, df2)

    def test_branch_b(self):
        ok, _ = verify_proposition1(NET, Demand(1, 7), SENS, tol=1e-6)
        assert ok

    def test_below_threshold_zero_tax(self):
        dem = Demand(2, 2)
        assert optimal_tax(NET, dem, SENS).tau2 == 0.0
        ok, _ = verify_proposition1(NET, dem, SENS, tol=1e-6)
        assert ok


def random_instances(n, seed=20240817, taxed=True):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        c1 = rng.uniform(1.0, 4.0)
        c2 = c1 + rng.uniform(0.5, 5.0)
        net = NetworkPair(c1, c2)
        demand = rng.uniform(0.1, 0.95) * net.total
        # keep demands on the oracle lattice so the grid hits them exactly
        d_a = round(rng.uniform(0, demand), 3)
        d_b = round(demand - d_a, 3)
        if d_a < 0 or d_b < 0 or d_a + d_b >= net.total:
            continue
        alpha_b = rng.uniform(0.2, 3.0)
        alpha_a = alpha_b * rng.uniform(1.1, 4.0)
        sens = Sensitivities(alpha_a, alpha_b)
        if taxed:
            base = optimal_tax(net, Demand(d_a, d_b), sens).tau2
            tau2 = rng.uniform(0, 3 * base) if base > 0 else rng.uniform(0, 0.5)
        else:
            tau2 = 0.0
        out.append((net, Demand(d_a, d_b), sens, TaxVector(0.0, tau2)))
    return out


def test_matches_grid_oracle_sample():
    # smaller sample here; the full 200-instance sweep runs in acceptance
    for net, dem, sens, taxes in random_instances(40, seed=7):
        rep = taxed_equilibrium(net, dem, sens, taxes)
        f1_star, _ = wardrop_grid_oracle(
            net.c1, net.c2, dem.d_a, dem.d_b,
            sens.alpha_a, sens.alpha_b, taxes.tau1, taxes.tau2,
        )
        assert rep.split.f1 == pytest.approx(f1_star, abs=2e-3)


def test_class_separation_under_positive_tax():
    for net, dem, sens, taxes in random_instances(60, seed=99):
        if taxes.tau2 <= 0:
            continue
        rep = taxed_equilibrium(net, dem, sens, taxes)
        if rep.split.f1_b > 1e-9:
            assert rep.split.f2_a <= 1e-9


def test_proposition1_parameter_grid():
    # light version of the acceptance grid
    for load in (0.35, 0.55, 0.75, 0.92):
        demand = load * NET.total
        for b_share in (0.0, 0.3, 0.7, 1.0):
            for ratio in (1.5, 3, 10):
                sens = Sensitivities(ratio, 1.0)
                dem = Demand(demand * (1 - b_share), demand * b_share)
                ok, diffs = verify_proposition1(NET, dem, sens, tol=1e-5)
                assert ok, (load, b_share, ratio, diffs)


class TestClassLatencies:
    def test_all_class_a(self):
        lat_a, lat_b, lat_ref = class_latencies(NET, 8, 1.0, SENS)
        assert math.isnan(lat_b)
        assert lat_ref == pytest.approx(0.2857, abs=1e-3)
        opt = optimal_assignment(NET, 8)
        expected = (
            opt.f1 * delay(4, opt.f1) + opt.f2 * delay(11, opt.f2)
        ) / 8
        assert lat_a == pytest.approx(expected, abs=1e-9)

    def test_share_at_optimal_split_point(self):
        opt = optimal_assignment(NET, 8)
        lat_a, lat_b, _ = class_latencies(NET, 8, opt.f1 / 8, SENS)
        assert lat_a == pytest.approx(delay(4, opt.f1), abs=1e-6)
        assert lat_a == pytest.approx(0.380, abs=1e-3)
        assert lat_b == pytest.approx(delay(11, opt.f2), abs=1e-6)

    def test_below_threshold_everyone_shares_one_latency(self):
        for share in (0.0, 0.4, 1.0):
            lat_a, lat_b, lat_ref = class_latencies(NET, 4, share, SENS)
            for v in (lat_a, lat_b, lat_ref):
                if not math.isnan(v):
                    assert v == pytest.approx(1 / 7, abs=1e-9)

    def test_delay_sensitive_class_beats_the_untaxed_latency(self):
        for share in (0.1, 0.3, 0.5, 0.7, 0.9):
            lat_a, lat_b, lat_ref = class_latencies(NET, 8, share, SENS)
            assert lat_b <= lat_ref + 1e-9
            assert lat_b <= lat_a + 1e-9

    def test_price_averse_class_pays_in_latency_when_it_fits_network1(self):
        # while class A fits entirely on the slow network it sits above the
        # untaxed latency; for larger shares its overflow rides network 2
        # and its average improves (total delay is minimized after all)
        f1_share = optimal_assignment(NET, 8).f1 / 8
        for share in (0.05, 0.1, f1_share):
            lat_a, _, lat_ref = class_latencies(NET, 8, share, SENS)
            assert lat_a >= lat_ref - 1e-9
