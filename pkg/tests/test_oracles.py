from itertools import combinations

import pytest

from gndes import (
    Edge,
    ExponentProfile,
    HostGraph,
    InfeasibleError,
    Instance,
    MultiRouting,
    Request,
    ResourceParams,
    Routing,
    SetConnectivity,
    validate_reply,
)
from gndes.errors import InstanceError
from gndes.oracles import (
    clamp_tolls,
    directed_multi_routing_oracle,
    explicit_oracle,
    machine_oracle,
    reply_oracle,
    routing_oracle,
    steiner_forest_oracle,
    steiner_tree_oracle,
    strong_connectivity_oracle,
)

from helpers import random_connected_graph, random_tolls, rng_for


def triangle():
    return HostGraph(
        directed=False,
        vertices=("a", "s", "t"),
        edges=(Edge("sa", "s", "a"), Edge("at", "a", "t"), Edge("st", "s", "t")),
    )


def all_simple_path_sets(graph, source, target):
    """Exhaustive enumeration, the independent oracle for routing tests."""
    out = []

    def dfs(u, visited, edges):
        if u == target:
            out.append(frozenset(edges))
            return
        for v, eid in graph.adjacency[u]:
            if v not in visited:
                dfs(v, visited | {v}, edges + (eid,))

    dfs(source, {source}, ())
    return out


def instance_for(graph, kind):
    resources = tuple(ResourceParams(e.id, 1.0, (1.0,)) for e in graph.edges)
    return Instance(ExponentProfile((2.0,)), resources,
                    (Request(id=1, kind=kind),), graph)


class TestRouting:
    def test_triangle(self):
        ans = routing_oracle(triangle(), "s", "t", {"sa": 1.0, "at": 1.0, "st": 3.0})
        assert ans.reply == frozenset({"sa", "at"})
        assert ans.toll_total == pytest.approx(2.0)
        assert ans.rho == 1.0

    def test_single_edge(self):
        g = HostGraph(False, ("s", "t"), (Edge("e", "s", "t"),))
        ans = routing_oracle(g, "s", "t", {"e": 7.0})
        assert ans.reply == frozenset({"e"}) and ans.toll_total == pytest.approx(7.0)

    def test_disconnected(self):
        g = HostGraph(False, ("s", "t", "u"), (Edge("e", "s", "u"),))
        with pytest.raises(InfeasibleError):
            routing_oracle(g, "s", "t", {"e": 1.0})

    def test_lexicographic_tie_break(self):
        # two equal-cost paths s-a-t and s-b-t: the vertex-lex smaller wins
        g = HostGraph(False, ("a", "b", "s", "t"),
                      (Edge("e1", "s", "a"), Edge("e2", "a", "t"),
                       Edge("e3", "s", "b"), Edge("e4", "b", "t")))
        tolls = {"e1": 1.0, "e2": 1.0, "e3": 1.0, "e4": 1.0}
        assert routing_oracle(g, "s", "t", tolls).reply == frozenset({"e1", "e2"})

    def test_parallel_edges_pick_cheaper_then_smaller_id(self):
        g = HostGraph(False, ("s", "t"),
                      (Edge("p1", "s", "t"), Edge("p2", "s", "t")))
        assert routing_oracle(g, "s", "t", {"p1": 2.0, "p2": 1.0}).reply == frozenset({"p2"})
        assert routing_oracle(g, "s", "t", {"p1": 1.0, "p2": 1.0}).reply == frozenset({"p1"})

    def test_directed_respects_orientation(self):
        g = HostGraph(True, ("s", "t"), (Edge("st", "s", "t"), Edge("ts", "t", "s")))
        ans = routing_oracle(g, "s", "t", {"st": 5.0, "ts": 1.0})
        assert ans.reply == frozenset({"st"})

    def test_matches_exhaustive_enumeration(self):
        rng = rng_for(21)
        for _ in range(30):
            g = random_connected_graph(rng, int(rng.integers(3, 8)),
                                       int(rng.integers(0, 4)))
            tolls = random_tolls(rng, g)
            verts = list(g.vertices)
            s, t = rng.choice(len(verts), size=2, replace=False)
            source, target = verts[s], verts[t]
            best = min(sum(tolls[e] for e in p)
                       for p in all_simple_path_sets(g, source, target))
            ans = routing_oracle(g, source, target, tolls)
            assert ans.toll_total == pytest.approx(best, rel=1e-12)

    def test_invariant_under_uniform_scaling(self):
        rng = rng_for(22)
        for _ in range(10):
            g = random_connected_graph(rng, 6, 3)
            tolls = random_tolls(rng, g)
            a = routing_oracle(g, "v0", "v1", tolls)
            scaled = {e: 7.5 * t for e, t in tolls.items()}
            b = routing_oracle(g, "v0", "v1", scaled)
            assert a.reply == b.reply


class TestMachine:
    def test_cheapest(self):
        assert machine_oracle(("m1", "m2"), {"m1": 5.0, "m2": 9.0}).reply == frozenset({"m1"})

    def test_tie_break_smallest_id(self):
        assert machine_oracle(("m2", "m1"), {"m1": 4.0, "m2": 4.0}).reply == frozenset({"m1"})

    def test_single(self):
        ans = machine_oracle(("m",), {"m": 3.0})
        assert ans.reply == frozenset({"m"}) and ans.toll_total == pytest.approx(3.0)

    def test_empty_rejected(self):
        with pytest.raises(InstanceError):
            machine_oracle((), {})


class TestExplicit:
    def test_picks_cheapest(self):
        ans = explicit_oracle((frozenset({"e1"}), frozenset({"e2"})), {"e1": 3.0, "e2": 2.0})
        assert ans.reply == frozenset({"e2"})

    def test_single_option(self):
        ans = explicit_oracle((frozenset({"e1", "e2"}),), {"e1": 1.0, "e2": 2.0})
        assert ans.reply == frozenset({"e1", "e2"}) and ans.toll_total == pytest.approx(3.0)

    def test_tie_prefers_first_listed(self):
        ans = explicit_oracle((frozenset({"e2"}), frozenset({"e1"})), {"e1": 2.0, "e2": 2.0})
        assert ans.reply == frozenset({"e2"})


def brute_force_subset_opt(graph, tolls, feasible):
    ids = sorted(e.id for e in graph.edges)
    best = None
    for k in range(len(ids) + 1):
        for combo in combinations(ids, k):
            reply = frozenset(combo)
            if feasible(reply):
                total = sum(tolls[e] for e in reply)
                if best is None or total < best:
                    best = total
    return best


class TestSteinerTree:
    def test_path_instance(self):
        g = HostGraph(False, ("a", "t1", "t2"),
                      (Edge("x", "t1", "a"), Edge("y", "a", "t2")))
        ans = steiner_tree_oracle(g, ("t1", "t2"), {"x": 1.0, "y": 1.0})
        assert ans.reply == frozenset({"x", "y"})
        assert ans.toll_total == pytest.approx(2.0)

    def test_star(self):
        g = HostGraph(False, ("c", "t1", "t2", "t3"),
                      (Edge("s1", "c", "t1"), Edge("s2", "c", "t2"), Edge("s3", "c", "t3")))
        ans = steiner_tree_oracle(g, ("t1", "t2", "t3"),
                                  {"s1": 1.0, "s2": 1.0, "s3": 1.0})
        assert ans.reply == frozenset({"s1", "s2", "s3"})
        assert ans.toll_total == pytest.approx(3.0)

    def test_prunes_dead_leaves(self):
        g = HostGraph(False, ("a", "b", "t1", "t2"),
                      (Edge("ab", "a", "b"), Edge("t1a", "t1", "a"), Edge("at2", "a", "t2")))
        ans = steiner_tree_oracle(g, ("t1", "t2"),
                                  {"ab": 0.1, "t1a": 1.0, "at2": 1.0})
        assert "ab" not in ans.reply

    def test_unreachable_terminals(self):
        g = HostGraph(False, ("t1", "t2", "x"), (Edge("e", "t1", "x"),))
        with pytest.raises(InfeasibleError):
            steiner_tree_oracle(g, ("t1", "t2"), {"e": 1.0})

    def test_within_factor_two_of_brute_force(self):
        rng = rng_for(31)
        inst_count = 0
        while inst_count < 25:
            g = random_connected_graph(rng, int(rng.integers(4, 7)),
                                       int(rng.integers(1, 4)))
            if len(g.edges) > 10:
                continue
            inst_count += 1
            tolls = random_tolls(rng, g)
            k = int(rng.integers(2, min(4, len(g.vertices)) + 1))
            terms = tuple(
                g.vertices[i] for i in rng.choice(len(g.vertices), size=k, replace=False))
            inst = instance_for(g, SetConnectivity(terms))
            ans = steiner_tree_oracle(g, terms, tolls)
            assert validate_reply(inst, inst.requests[0], ans.reply)
            assert ans.toll_total == pytest.approx(sum(tolls[e] for e in ans.reply))
            opt = brute_force_subset_opt(
                g, tolls,
                lambda reply: bool(validate_reply(inst, inst.requests[0], reply)))
            assert ans.toll_total <= 2.0 * opt + 1e-9


class TestSteinerForest:
    def test_single_pair_matches_routing(self):
        g = triangle()
        tolls = {"sa": 1.0, "at": 1.0, "st": 3.0}
        forest = steiner_forest_oracle(g, (("s", "t"),), tolls)
        path = routing_oracle(g, "s", "t", tolls)
        assert forest.toll_total == pytest.approx(path.toll_total)

    def test_disjoint_pairs_take_disjoint_paths(self):
        g = HostGraph(False, ("a", "b", "c", "d"),
                      (Edge("ab", "a", "b"), Edge("cd", "c", "d")))
        ans = steiner_forest_oracle(g, (("a", "b"), ("c", "d")), {"ab": 1.0, "cd": 2.0})
        assert ans.reply == frozenset({"ab", "cd"})

    def test_path_with_two_pairs_drops_middle_edge(self):
        g = HostGraph(False, ("v1", "v2", "v3", "v4"),
                      (Edge("a", "v1", "v2"), Edge("b", "v2", "v3"), Edge("c", "v3", "v4")))
        ans = steiner_forest_oracle(g, (("v1", "v2"), ("v3", "v4")),
                                    {"a": 1.0, "b": 1.0, "c": 1.0})
        assert ans.reply == frozenset({"a", "c"})
        assert ans.toll_total == pytest.approx(2.0)

    def test_unreachable_pair(self):
        g = HostGraph(False, ("a", "b", "c"), (Edge("ab", "a", "b"),))
        with pytest.raises(InfeasibleError):
            steiner_forest_oracle(g, (("a", "c"),), {"ab": 1.0})

    def test_within_factor_two_of_brute_force(self):
        rng = rng_for(37)
        inst_count = 0
        while inst_count < 25:
            g = random_connected_graph(rng, int(rng.integers(4, 7)),
                                       int(rng.integers(1, 4)))
            if len(g.edges) > 10:
                continue
            inst_count += 1
            tolls = random_tolls(rng, g)
            n_pairs = int(rng.integers(1, 3))
            pairs = []
            for _ in range(n_pairs):
                a, b = rng.choice(len(g.vertices), size=2, replace=False)
                pairs.append((g.vertices[a], g.vertices[b]))
            inst = instance_for(g, MultiRouting(tuple(pairs)))
            ans = steiner_forest_oracle(g, pairs, tolls)
            assert validate_reply(inst, inst.requests[0], ans.reply)
            assert ans.toll_total == pytest.approx(sum(tolls[e] for e in ans.reply))
            opt = brute_force_subset_opt(
                g, tolls,
                lambda reply: bool(validate_reply(inst, inst.requests[0], reply)))
            assert ans.toll_total <= 2.0 * opt + 1e-9


class TestDirectedHeuristics:
    def cycle_graph(self):
        return HostGraph(True, ("a", "b", "c"),
                         (Edge("ab", "a", "b"), Edge("bc", "b", "c"), Edge("ca", "c", "a")))

    def test_strong_connectivity_cycle(self):
        g = self.cycle_graph()
        tolls = {"ab": 1.0, "bc": 1.0, "ca": 1.0}
        ans = strong_connectivity_oracle(g, ("a", "b", "c"), tolls)
        inst = instance_for(g, SetConnectivity(("a", "b", "c")))
        assert validate_reply(inst, inst.requests[0], ans.reply)
        assert ans.rho == 3.0

    def test_directed_multi_routing_union(self):
        g = self.cycle_graph()
        tolls = {"ab": 1.0, "bc": 1.0, "ca": 1.0}
        ans = directed_multi_routing_oracle(g, (("a", "b"), ("b", "c")), tolls)
        assert ans.reply == frozenset({"ab", "bc"})
        assert ans.rho == 2.0


class TestDispatchAndClamping:
    def test_clamp_floor(self):
        clamped = clamp_tolls({"e": 0.0, "f": -1.0, "g": 2.0})
        assert clamped["e"] > 0 and clamped["f"] > 0 and clamped["g"] == 2.0

    def test_every_answer_validates(self):
        rng = rng_for(41)
        for _ in range(20):
            g = random_connected_graph(rng, 5, 2)
            tolls = random_tolls(rng, g)
            verts = list(g.vertices)
            kinds = [
                Routing(verts[0], verts[1]),
                MultiRouting(((verts[0], verts[2]), (verts[1], verts[3]))),
                SetConnectivity((verts[0], verts[2], verts[4])),
            ]
            for kind in kinds:
                inst = instance_for(g, kind)
                ans = reply_oracle(inst, inst.requests[0], tolls)
                assert validate_reply(inst, inst.requests[0], ans.reply)
                assert ans.toll_total == pytest.approx(
                    sum(tolls[e] for e in ans.reply), rel=1e-12)
