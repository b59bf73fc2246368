import pytest

from gndes import (
    ConfigError,
    Edge,
    EnumerationLimitError,
    ExplicitReplies,
    ExponentProfile,
    HostGraph,
    Instance,
    MachineChoice,
    Request,
    ResourceParams,
    Routing,
    total_cost,
)
from gndes.analysis import (
    EnumerationLimits,
    brute_force_opt,
    budget_balance_check,
    candidate_replies,
    enumerate_nash,
    player_cost,
    poa_lower_bound_instance,
    potential,
    potential_bounds_check,
    potential_by_prefix,
    potential_exactness_check,
    smoothness_check,
)
from gndes.bounds import gamma_alpha, harmonic, lambda_alpha
from gndes.sharing import rep_expansion_constants

from helpers import random_explicit_instance, rng_for


def one_edge_instance(weights=(1, 2), sigma=6.0):
    exp = ExponentProfile((2.0,))
    res = (ResourceParams("m", sigma, (1.0,)),)
    reqs = tuple(
        Request(id=i + 1, kind=ExplicitReplies((frozenset({"m"}),)), weights={"m": w})
        for i, w in enumerate(weights))
    return Instance(exp, res, reqs)


def parallel_edges_instance():
    exp = ExponentProfile((2.0,))
    res = (ResourceParams("e1", 1.0, (1.0,)), ResourceParams("e2", 1.0, (1.0,)))
    reqs = tuple(
        Request(id=i, kind=ExplicitReplies((frozenset({"e1"}), frozenset({"e2"}))))
        for i in (1, 2))
    return Instance(exp, res, reqs)


class TestPotential:
    def test_two_user_example(self):
        inst = one_edge_instance()
        p = (frozenset({"m"}), frozenset({"m"}))
        assert potential(inst, p) == pytest.approx(16.0)

    def test_single_user_equals_full_cost(self):
        inst = one_edge_instance(weights=(3,))
        p = (frozenset({"m"}),)
        assert potential(inst, p) == pytest.approx(15.0)

    def test_unused_edges_contribute_nothing(self):
        inst = parallel_edges_instance()
        p = (frozenset({"e1"}), frozenset({"e1"}))
        only_e1 = potential(inst, p)
        assert only_e1 == pytest.approx(
            1.0 * harmonic(2) + (1 + 1) / 2 + 4 / 2)

    def test_prefix_form_matches_for_any_order(self):
        inst = one_edge_instance()
        p = (frozenset({"m"}), frozenset({"m"}))
        assert potential_by_prefix(inst, p) == pytest.approx(16.0)
        assert potential_by_prefix(inst, p, {"m": (2, 1)}) == pytest.approx(16.0)

    def test_prefix_equivalence_random_sweep(self):
        rng = rng_for(51)
        for _ in range(20):
            inst = random_explicit_instance(rng, max_players=4, max_resources=4)
            profile = tuple(req.kind.replies[0] for req in inst.requests)
            reference = potential(inst, profile)
            for variant in range(3):
                order_map = {}
                for res in inst.resources:
                    users = [req.id for req, rep in zip(inst.requests, profile)
                             if res.id in rep]
                    perm = list(users)
                    if variant == 1:
                        perm = perm[::-1]
                    elif variant == 2:
                        perm = [perm[k] for k in rng.permutation(len(perm))]
                    order_map[res.id] = tuple(perm)
                assert potential_by_prefix(inst, profile, order_map) == pytest.approx(
                    reference, rel=1e-9)


class TestPotentialBounds:
    def test_example_numbers(self):
        inst = one_edge_instance()
        p = (frozenset({"m"}), frozenset({"m"}))
        c = total_cost(inst, p)
        phi = potential(inst, p)
        assert c / 2 == pytest.approx(7.5)
        assert phi == pytest.approx(16.0)
        assert harmonic(2) * c == pytest.approx(22.5)
        assert c / 2 <= phi <= harmonic(2) * c

    def test_single_user_upper_bound_tight(self):
        inst = one_edge_instance(weights=(3,))
        report = potential_bounds_check(inst, [(frozenset({"m"}),)])
        assert report.ok

    def test_random_profiles(self):
        rng = rng_for(53)
        for _ in range(15):
            inst = random_explicit_instance(rng, max_players=4, max_resources=4)
            profiles = []
            for _ in range(20):
                profiles.append(tuple(
                    req.kind.replies[int(rng.integers(len(req.kind.replies)))]
                    for req in inst.requests))
            assert potential_bounds_check(inst, profiles).ok


class TestPotentialExactness:
    def test_parallel_edge_move(self):
        inst = parallel_edges_instance()
        shared = (frozenset({"e1"}), frozenset({"e1"}))
        check = potential_exactness_check(inst, shared, 0, frozenset({"e2"}))
        assert check.delta_cost == pytest.approx(-0.5)
        assert check.delta_potential == pytest.approx(-0.5)
        assert check.ok

    def test_no_move_is_zero(self):
        inst = parallel_edges_instance()
        shared = (frozenset({"e1"}), frozenset({"e1"}))
        check = potential_exactness_check(inst, shared, 0, frozenset({"e1"}))
        assert check.delta_potential == 0.0 and check.delta_cost == 0.0

    def test_random_unilateral_deviations(self):
        rng = rng_for(59)
        for _ in range(15):
            inst = random_explicit_instance(rng, max_players=3, max_resources=4)
            profile = tuple(req.kind.replies[0] for req in inst.requests)
            for pos, req in enumerate(inst.requests):
                for alt in req.kind.replies:
                    assert potential_exactness_check(inst, profile, pos, alt).ok


class TestBruteForce:
    def test_parallel_edges(self):
        inst = parallel_edges_instance()
        profile, cost = brute_force_opt(inst)
        assert cost == pytest.approx(4.0)
        assert profile[0] != profile[1]

    def test_single_player(self):
        exp = ExponentProfile((2.0,))
        res = (ResourceParams("m1", 1.0, (1.0,)), ResourceParams("m2", 3.0, (1.0,)))
        inst = Instance(exp, res, (Request(id=1, kind=MachineChoice(("m1", "m2"))),))
        _, cost = brute_force_opt(inst)
        assert cost == pytest.approx(2.0)

    def test_refusal_over_truncation(self):
        inst = parallel_edges_instance()
        with pytest.raises(EnumerationLimitError):
            brute_force_opt(inst, EnumerationLimits(max_profiles=3))

    def test_path_cap_refusal(self):
        g = HostGraph(False, ("s", "t"),
                      tuple(Edge(f"p{k}", "s", "t") for k in range(5)))
        inst = Instance(
            ExponentProfile((2.0,)),
            tuple(ResourceParams(e.id, 1.0, (1.0,)) for e in g.edges),
            (Request(id=1, kind=Routing("s", "t")),), g)
        with pytest.raises(EnumerationLimitError):
            candidate_replies(inst, inst.requests[0], EnumerationLimits(max_paths=3))


class TestNash:
    def test_parallel_edges_split_is_nash(self):
        inst = parallel_edges_instance()
        report = enumerate_nash(inst, "shapley-exact")
        assert all(p[0] != p[1] for p in report.nash_profiles)
        assert len(report.nash_profiles) == 2
        assert report.poa == pytest.approx(1.0)

    def test_single_player_best_reply_unique_nash(self):
        exp = ExponentProfile((2.0,))
        res = (ResourceParams("m1", 1.0, (1.0,)), ResourceParams("m2", 3.0, (1.0,)))
        inst = Instance(exp, res, (Request(id=1, kind=MachineChoice(("m1", "m2"))),))
        report = enumerate_nash(inst, "shapley-exact")
        assert report.nash_profiles == ((frozenset({"m1"}),),)

    def test_robust_poa_consistency(self):
        # worst NE cost stays below (lambda/(1-mu)) * optimum with the
        # certified smoothness constants, on every enumerable instance
        rng = rng_for(63)
        for mechanism in ("proportional", "shapley-exact"):
            for _ in range(8):
                inst = random_explicit_instance(rng, max_players=3, max_resources=4)
                constants = rep_expansion_constants(mechanism, inst.exponents)
                lam = gamma_alpha(inst) + lambda_alpha(constants,
                                                       inst.exponents.alpha_max)
                report = enumerate_nash(inst, mechanism)
                if report.worst_nash_cost is not None:
                    assert report.worst_nash_cost <= (lam / 0.5) * report.opt_cost

    def test_sampled_mechanism_rejected(self):
        with pytest.raises(ConfigError):
            player_cost(parallel_edges_instance(), "shapley-sampled",
                        (frozenset({"e1"}), frozenset({"e1"})), 0)


class TestSmoothness:
    @pytest.mark.parametrize("mechanism", ["proportional", "shapley-exact"])
    def test_parallel_edges_exhaustive(self, mechanism):
        inst = parallel_edges_instance()
        constants = rep_expansion_constants(mechanism, inst.exponents)
        lam = gamma_alpha(inst) + lambda_alpha(constants, inst.exponents.alpha_max)
        report = smoothness_check(inst, mechanism, lam, 0.5)
        assert report.pairs_tested == 16
        assert report.ok
        assert report.max_ratio <= lam

    def test_identical_profiles_satisfied_by_budget_balance(self):
        inst = parallel_edges_instance()
        report = smoothness_check(inst, "shapley-exact", 1.0, 0.5)
        # lambda = 1, mu = 0.5 is far below the certified constants, but the
        # diagonal pairs (p = p') hold whenever lambda >= 1 - mu
        assert report.pairs_tested == 16

    def test_random_instances_with_certified_constants(self):
        rng = rng_for(61)
        for mechanism in ("proportional", "shapley-exact"):
            for _ in range(6):
                inst = random_explicit_instance(rng, max_players=3, max_resources=4)
                constants = rep_expansion_constants(mechanism, inst.exponents)
                lam = gamma_alpha(inst) + lambda_alpha(constants, inst.exponents.alpha_max)
                report = smoothness_check(inst, mechanism, lam, 0.5, max_pairs=400,
                                          seed=int(rng.integers(10_000)))
                assert report.ok


class TestBudgetBalanceCheck:
    def test_sweep(self):
        rng = rng_for(67)
        queries = []
        for _ in range(50):
            inst = random_explicit_instance(rng, max_players=4, max_resources=3)
            res = inst.resources[0]
            users = tuple((req.id, req.weight(res.id)) for req in inst.requests)
            queries.append((res, inst.exponents, users))
        for mechanism in ("proportional", "shapley-exact"):
            assert budget_balance_check(mechanism, queries).ok


class TestPoaFamily:
    def test_rejects_non_integral_ratio(self):
        with pytest.raises(ConfigError, match="nearest valid sigma"):
            poa_lower_bound_instance(15.0, 1.0, 2.0)
        with pytest.raises(ConfigError):
            poa_lower_bound_instance(1.0, 1.0, 2.0)   # N = 1

    def test_n4_shape_and_costs(self):
        inst = poa_lower_bound_instance(16.0, 1.0, 2.0)
        assert len(inst.resources) == 9 and inst.n_requests == 4
        direct = tuple(frozenset({f"e{i}"}) for i in range(1, 5))
        via_hub = tuple(frozenset({"estar", f"f{i}"}) for i in range(1, 5))
        assert total_cost(inst, direct) == pytest.approx(68.0)
        assert total_cost(inst, via_hub) == pytest.approx(40.8)

    def test_deviation_from_all_direct_costs_more(self):
        inst = poa_lower_bound_instance(16.0, 1.0, 2.0)
        # single-user shares equal full edge costs for any budget-balanced
        # mechanism: 13.6 + 3.8 = 17.4 > 17
        estar = inst.resource_by_id["estar"]
        f1 = inst.resource_by_id["f1"]
        deviation = (estar.sigma + estar.xis[0]) + (f1.sigma + f1.xis[0])
        stay = 16.0 + 1.0
        assert deviation == pytest.approx(17.4)
        assert deviation > stay

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_measured_poa_exceeds_n_over_3(self, n):
        inst = poa_lower_bound_instance(float(n * n), 1.0, 2.0)
        for mechanism in ("proportional", "shapley-exact"):
            report = enumerate_nash(inst, mechanism)
            direct = tuple(frozenset({f"e{i}"}) for i in range(1, n + 1))
            assert direct in report.nash_profiles
            assert report.poa >= n / 3.0

    def test_non_integer_exponent(self):
        # sigma = 8, xi = 1, alpha = 1.5 gives N = 8^(2/3) = 4 exactly
        inst = poa_lower_bound_instance(8.0, 1.0, 1.5)
        assert inst.n_requests == 4
        report = enumerate_nash(inst, "shapley-exact")
        direct = tuple(frozenset({f"e{i}"}) for i in range(1, 5))
        assert direct in report.nash_profiles
        assert report.poa >= 4 / 3.0

    def test_two_exponent_variant_keeps_shape(self):
        inst = poa_lower_bound_instance(16.0, 1.0, 2.0, q=2)
        assert inst.exponents.q == 2
        assert inst.exponents.alphas[1] == pytest.approx(1.5)
        # tail factors sit a factor 10 inside the admissible region
        estar = inst.resource_by_id["estar"]
        bound = estar.xis[0] / (2 * 4 ** 1.5 * 5)
        assert estar.xis[1] <= bound * (1 + 1e-12)
