"""Follow-the-perturbed-leader on routing instances.

Each player accumulates her would-be proportional tolls and, every round,
takes the cheapest path under those cumulative tolls plus fresh uniform
noise.  Per-round regret vanishes as the horizon grows, and a uniformly
random round's profile approximates the optimum whenever the scaled optimum
is bounded away from zero.
"""

import math

from gndes import (
    Edge,
    ExponentProfile,
    HostGraph,
    Instance,
    Request,
    ResourceParams,
    Routing,
)
from gndes.analysis import brute_force_opt
from gndes.fpl import FplConfig, normalize_costs, run_l_apx

graph = HostGraph(False, ("s", "t"), (Edge("e1", "s", "t"), Edge("e2", "s", "t")))
single = Instance(
    exponents=ExponentProfile((2.0,)),
    resources=(ResourceParams("e1", 1.0, (1.0,)), ResourceParams("e2", 5.0, (1.0,))),
    requests=(Request(id=1, kind=Routing("s", "t")),),
    graph=graph,
)

scaled, scale = normalize_costs(single)
print(f"cost scale {scale:g}: every per-edge share now lies in [0, 1]\n")

print("single player, two edges of different cost; regret per round shrinks:")
v, m = 2, 2
for rounds in (100, 400, 1600):
    regrets = [run_l_apx(single, FplConfig(seed=s, rounds=rounds)).regrets[0]
               for s in range(10)]
    mean = sum(regrets) / len(regrets)
    bound = 2 * v * math.sqrt(m * rounds)
    print(f"  T'={rounds:<5} mean regret {mean:7.3f}   "
          f"regret/T' {mean / rounds:.5f}   bound {bound:7.1f}")

two = Instance(
    exponents=ExponentProfile((2.0,)),
    resources=(ResourceParams("e1", 1.0, (1.0,)), ResourceParams("e2", 1.0, (1.0,))),
    requests=tuple(Request(id=i, kind=Routing("s", "t")) for i in (1, 2)),
    graph=graph,
)
_, opt = brute_force_opt(two)
print(f"\ntwo players on identical edges (optimum {opt:g}); output over seeds:")
costs = [run_l_apx(two, FplConfig(seed=s, rounds=400)).cost for s in range(12)]
print(f"  output costs: {sorted(round(c, 2) for c in costs)}")
print(f"  mean {sum(costs) / len(costs):.3f} "
      f"(the split optimum is found in most rounds)")
