import math

import pytest

from gndes import (
    ConfigError,
    Edge,
    ExponentProfile,
    HostGraph,
    Instance,
    MachineChoice,
    Request,
    ResourceParams,
    Routing,
    rep_cost,
)
from gndes.analysis import brute_force_opt
from gndes.bounds import gamma_alpha, lambda_alpha
from gndes.fpl import FplConfig, fpl_step, normalize_costs, run_l_apx, theoretical_round_count
from gndes.rng import keyed_rng
from gndes.sharing import rep_expansion_constants

from helpers import rng_for


def single_edge_instance():
    g = HostGraph(False, ("s", "t"), (Edge("e", "s", "t"),))
    return Instance(
        ExponentProfile((2.0,)),
        (ResourceParams("e", 6.0, (1.0,)),),
        (Request(id=1, kind=Routing("s", "t"), weights={"e": 3}),),
        g,
    )


def two_edge_instance(sigma2=5.0):
    g = HostGraph(False, ("s", "t"), (Edge("e1", "s", "t"), Edge("e2", "s", "t")))
    return Instance(
        ExponentProfile((2.0,)),
        (ResourceParams("e1", 1.0, (1.0,)), ResourceParams("e2", sigma2, (1.0,))),
        (Request(id=1, kind=Routing("s", "t")),),
        g,
    )


class TestNormalization:
    def test_single_edge_scale(self):
        scaled, scale = normalize_costs(single_edge_instance())
        assert scale == pytest.approx(15.0)
        assert rep_cost(scaled.resources[0], scaled.exponents, 3) == pytest.approx(1.0)

    def test_already_small_instance_unchanged(self):
        g = HostGraph(False, ("s", "t"), (Edge("e", "s", "t"),))
        inst = Instance(
            ExponentProfile((2.0,)),
            (ResourceParams("e", 0.1, (0.05,)),),
            (Request(id=1, kind=Routing("s", "t")),),
            g,
        )
        scaled, scale = normalize_costs(inst)
        assert scale == 1.0
        assert scaled.resources[0].sigma == pytest.approx(0.1)

    def test_scale_comes_from_worst_edge(self):
        inst = two_edge_instance()
        _, scale = normalize_costs(inst)
        assert scale == pytest.approx(6.0)  # F_e2(1) = 5 + 1 over F_e1(1) = 2

    def test_rejects_non_routing(self):
        inst = Instance(
            ExponentProfile((2.0,)),
            (ResourceParams("m", 1.0, (1.0,)),),
            (Request(id=1, kind=MachineChoice(("m",))),),
        )
        with pytest.raises(ConfigError):
            normalize_costs(inst)

    def test_normalization_preserves_argmin(self):
        rng = rng_for(71)
        for _ in range(10):
            inst = two_edge_instance(sigma2=float(rng.uniform(0.5, 8.0)))
            scaled, _ = normalize_costs(inst)
            p_orig, _ = brute_force_opt(inst)
            p_scaled, _ = brute_force_opt(scaled)
            assert p_orig == p_scaled


class TestFplStep:
    def test_single_path_always_chosen(self):
        g = HostGraph(False, ("s", "t"), (Edge("e", "s", "t"),))
        for seed in range(5):
            reply = fpl_step(g, "s", "t", {"e": 0.3}, 1.0, keyed_rng(seed))
            assert reply == frozenset({"e"})

    def test_zero_tolls_split_evenly(self):
        g = HostGraph(False, ("s", "t"), (Edge("e1", "s", "t"), Edge("e2", "s", "t")))
        counts = {"e1": 0, "e2": 0}
        trials = 800
        for seed in range(trials):
            reply = fpl_step(g, "s", "t", {}, 1.0, keyed_rng(seed, "fair"))
            counts[next(iter(reply))] += 1
        # chi-squared with 1 dof at the 0.001 level
        expected = trials / 2
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2 < 10.83

    def test_large_gap_dominates_perturbation(self):
        g = HostGraph(False, ("s", "t"), (Edge("e1", "s", "t"), Edge("e2", "s", "t")))
        for seed in range(20):
            reply = fpl_step(g, "s", "t", {"e1": 0.0, "e2": 100.0}, 1.0, keyed_rng(seed))
            assert reply == frozenset({"e1"})


class TestRunLApx:
    def test_single_path_zero_regret(self):
        result = run_l_apx(single_edge_instance(), FplConfig(seed=1, rounds=50))
        assert result.regrets[0] == pytest.approx(0.0, abs=1e-12)
        assert result.cost == pytest.approx(15.0)

    def test_regret_rate_decreases(self):
        inst = two_edge_instance()
        rates = []
        for rounds in (100, 400, 1600):
            regs = []
            for seed in range(10):
                r = run_l_apx(inst, FplConfig(seed=seed, rounds=rounds))
                regs.append(r.regrets[0])
            rates.append(sum(regs) / len(regs) / rounds)
        assert rates[0] > rates[1] > rates[2]

    def test_regret_bound(self):
        inst = two_edge_instance()
        v, m = 2, 2
        for rounds in (100, 400):
            regs = [run_l_apx(inst, FplConfig(seed=s, rounds=rounds)).regrets[0]
                    for s in range(10)]
            assert sum(regs) / len(regs) <= 2 * v * math.sqrt(m * rounds)

    def test_deterministic_per_seed(self):
        inst = two_edge_instance()
        a = run_l_apx(inst, FplConfig(seed=9, rounds=60), collect_trace=True)
        b = run_l_apx(inst, FplConfig(seed=9, rounds=60), collect_trace=True)
        assert a.profile == b.profile and a.regrets == b.regrets and a.trace == b.trace

    def test_theoretical_round_count(self):
        inst = two_edge_instance()
        assert theoretical_round_count(inst) == 4 * 1 * 4 * 2
        result = run_l_apx(inst, FplConfig(seed=0))
        assert result.rounds == min(32, FplConfig().rounds_cap)
        assert result.theoretical_rounds == 32

    def test_two_player_cost_within_smooth_bound(self):
        # average output cost over seeds against the conditional guarantee
        # 2 (gamma + lambda_alpha + 1/LB) C'* with LB = C'* known by brute force
        g = HostGraph(False, ("s", "t"), (Edge("e1", "s", "t"), Edge("e2", "s", "t")))
        inst = Instance(
            ExponentProfile((2.0,)),
            (ResourceParams("e1", 1.0, (1.0,)), ResourceParams("e2", 1.0, (1.0,))),
            tuple(Request(id=i, kind=Routing("s", "t")) for i in (1, 2)),
            g,
        )
        scaled, scale = normalize_costs(inst)
        _, opt_scaled = brute_force_opt(scaled)
        constants = rep_expansion_constants("proportional", inst.exponents)
        bound = 2 * (gamma_alpha(inst) + lambda_alpha(constants, 2.0) + 1 / opt_scaled)
        costs = [run_l_apx(inst, FplConfig(seed=s, rounds=200)).cost / scale
                 for s in range(10)]
        assert sum(costs) / len(costs) <= bound * opt_scaled
