"""The hub-and-spoke family whose price of anarchy grows like N/3.

N unit requests each choose between a private direct edge and a shared hub
route.  Going direct is an equilibrium under any budget-balanced sharing
rule (a lone deviator would pay the hub's full startup), yet routing
everybody through the hub costs less than 3(sigma + xi).
"""

from gndes import total_cost
from gndes.analysis import brute_force_opt, enumerate_nash, poa_lower_bound_instance

for n in (2, 3, 4, 5):
    sigma = float(n * n)          # with xi = 1 and alpha = 2, N = sqrt(sigma)
    instance = poa_lower_bound_instance(sigma, 1.0, 2.0)
    direct = tuple(frozenset({f"e{i}"}) for i in range(1, n + 1))
    via_hub = tuple(frozenset({"estar", f"f{i}"}) for i in range(1, n + 1))

    opt_profile, opt_cost = brute_force_opt(instance)
    report = enumerate_nash(instance, "shapley-exact")
    print(f"N={n}: all-direct cost {total_cost(instance, direct):g}, "
          f"all-via-hub cost {total_cost(instance, via_hub):g}, optimum {opt_cost:g}")
    print(f"      equilibria {len(report.nash_profiles)}, "
          f"worst {report.worst_nash_cost:g}, PoA {report.poa:.3f} "
          f"(>= N/3 = {n / 3:.3f}: {report.poa >= n / 3})")

print("\nthe family is emitted by `gndes poa-gen --sigma 16 --xi 1 --alpha 2 "
      "--out poa.json` for use with the other commands")
