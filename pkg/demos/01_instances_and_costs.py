"""Build an instance, evaluate loads and costs, validate replies.

Resources cost nothing while idle; once loaded they pay a startup charge
plus power terms in the load.  This makes sharing attractive at small loads
(split the startup cost) and splitting attractive at large loads (the power
terms are superadditive).
"""

from gndes import (
    Edge,
    ExponentProfile,
    HostGraph,
    Instance,
    Request,
    ResourceParams,
    Routing,
    load_vector,
    rep_cost,
    total_cost,
    validate_reply,
)
from gndes.io import instance_to_text, parse_instance_text

exponents = ExponentProfile((2.0,))
edge = ResourceParams("wire", sigma=6.0, xis=(1.0,))

print("cost curve of one resource (sigma=6, xi=1, alpha=2):")
for load in range(5):
    print(f"  load {load}: {rep_cost(edge, exponents, load):g}")
print("  note the jump at load 1 (startup) and the growth after it\n")

graph = HostGraph(
    directed=False,
    vertices=("s", "a", "t"),
    edges=(Edge("sa", "s", "a"), Edge("at", "a", "t"), Edge("st", "s", "t")),
)
instance = Instance(
    exponents=exponents,
    resources=(
        ResourceParams("sa", 1.0, (1.0,)),
        ResourceParams("at", 1.0, (1.0,)),
        ResourceParams("st", 3.0, (1.0,)),
    ),
    requests=(
        Request(id=1, kind=Routing("s", "t")),
        Request(id=2, kind=Routing("s", "t"), default_weight=2),
    ),
    graph=graph,
)

detour = frozenset({"sa", "at"})
direct = frozenset({"st"})

profile = (detour, direct)
print("two routing requests on a triangle, one weighing 2:")
print("  loads :", load_vector(instance, profile))
print("  cost  :", total_cost(instance, profile))
print("  both on the direct edge:",
      total_cost(instance, (direct, direct)))

print("\nreply validation names the first violated requirement:")
verdict = validate_reply(instance, instance.requests[0], frozenset({"sa"}))
print(f"  {{sa}} for request 1 -> ok={verdict.ok}: {verdict.reason}")

print("\nthe same instance as a JSON document:")
text = instance_to_text(instance)
print(text)
assert parse_instance_text(text) == instance
print("round-trip parse returns an equal instance")
