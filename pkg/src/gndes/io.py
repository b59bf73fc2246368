"""Instance files.

A JSON document with top-level keys "alphas", "resources", optional "graph"
and "requests".  Unknown keys are rejected at every level.  The writer emits
a canonical form (fixed key order, two-space indent, sorted collections, a
trailing newline) so write(parse(file)) is byte-identical for canonically
formatted files.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import InstanceError, ParseError
from .instance import (
    Edge,
    ExplicitReplies,
    ExponentProfile,
    HostGraph,
    Instance,
    MachineChoice,
    MultiRouting,
    Request,
    ResourceParams,
    Routing,
    SetConnectivity,
)

_KIND_TAGS = {
    Routing: "routing",
    MultiRouting: "multi_routing",
    SetConnectivity: "set_connectivity",
    MachineChoice: "machine_choice",
    ExplicitReplies: "explicit",
}


def _require_keys(obj: dict, allowed: set[str], required: set[str], path: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ParseError(f"{path}: missing key(s) {sorted(missing)}")


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}: expected a number")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{path}: expected an integer")
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise ParseError(f"{path}: expected a string")
    return value


def _parse_kind(obj, path: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object")
    tag = obj.get("type")
    if tag == "routing":
        _require_keys(obj, {"type", "source", "target"}, {"source", "target"}, path)
        return Routing(_as_str(obj["source"], path + ".source"),
                       _as_str(obj["target"], path + ".target"))
    if tag == "multi_routing":
        _require_keys(obj, {"type", "pairs"}, {"pairs"}, path)
        pairs = obj["pairs"]
        if not isinstance(pairs, list):
            raise ParseError(f"{path}.pairs: expected a list")
        out = []
        for i, pair in enumerate(pairs):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ParseError(f"{path}.pairs[{i}]: expected [source, target]")
            out.append((_as_str(pair[0], f"{path}.pairs[{i}][0]"),
                        _as_str(pair[1], f"{path}.pairs[{i}][1]")))
        return MultiRouting(tuple(out))
    if tag == "set_connectivity":
        _require_keys(obj, {"type", "terminals"}, {"terminals"}, path)
        terms = obj["terminals"]
        if not isinstance(terms, list):
            raise ParseError(f"{path}.terminals: expected a list")
        return SetConnectivity(tuple(_as_str(t, f"{path}.terminals[{i}]")
                                     for i, t in enumerate(terms)))
    if tag == "machine_choice":
        _require_keys(obj, {"type", "machines"}, {"machines"}, path)
        machines = obj["machines"]
        if not isinstance(machines, list):
            raise ParseError(f"{path}.machines: expected a list")
        return MachineChoice(tuple(_as_str(m, f"{path}.machines[{i}]")
                                   for i, m in enumerate(machines)))
    if tag == "explicit":
        _require_keys(obj, {"type", "replies"}, {"replies"}, path)
        replies = obj["replies"]
        if not isinstance(replies, list):
            raise ParseError(f"{path}.replies: expected a list")
        out = []
        for i, rep in enumerate(replies):
            if not isinstance(rep, list):
                raise ParseError(f"{path}.replies[{i}]: expected a list of resource ids")
            out.append(frozenset(_as_str(e, f"{path}.replies[{i}]") for e in rep))
        return ExplicitReplies(tuple(out))
    raise ParseError(f"{path}.type: unknown request kind {tag!r}")


def parse_instance_text(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level: expected an object")
    _require_keys(doc, {"alphas", "resources", "graph", "requests"},
                  {"alphas", "resources", "requests"}, "top level")

    alphas = doc["alphas"]
    if not isinstance(alphas, list) or not alphas:
        raise ParseError("alphas: expected a nonempty list of numbers")
    exponents_values = tuple(_as_number(a, f"alphas[{i}]") for i, a in enumerate(alphas))

    resources = []
    if not isinstance(doc["resources"], list):
        raise ParseError("resources: expected a list")
    for i, robj in enumerate(doc["resources"]):
        path = f"resources[{i}]"
        if not isinstance(robj, dict):
            raise ParseError(f"{path}: expected an object")
        _require_keys(robj, {"id", "sigma", "xis"}, {"id", "sigma", "xis"}, path)
        xis = robj["xis"]
        if not isinstance(xis, list):
            raise ParseError(f"{path}.xis: expected a list")
        resources.append(ResourceParams(
            id=_as_str(robj["id"], path + ".id"),
            sigma=_as_number(robj["sigma"], path + ".sigma"),
            xis=tuple(_as_number(x, f"{path}.xis[{j}]") for j, x in enumerate(xis)),
        ))

    graph = None
    if "graph" in doc:
        gobj = doc["graph"]
        if not isinstance(gobj, dict):
            raise ParseError("graph: expected an object")
        _require_keys(gobj, {"directed", "vertices", "edges"},
                      {"directed", "vertices", "edges"}, "graph")
        if not isinstance(gobj["directed"], bool):
            raise ParseError("graph.directed: expected a boolean")
        if not isinstance(gobj["vertices"], list):
            raise ParseError("graph.vertices: expected a list")
        if not isinstance(gobj["edges"], list):
            raise ParseError("graph.edges: expected a list")
        edges = []
        for i, eobj in enumerate(gobj["edges"]):
            path = f"graph.edges[{i}]"
            if not isinstance(eobj, dict):
                raise ParseError(f"{path}: expected an object")
            _require_keys(eobj, {"id", "tail", "head"}, {"id", "tail", "head"}, path)
            edges.append(Edge(_as_str(eobj["id"], path + ".id"),
                              _as_str(eobj["tail"], path + ".tail"),
                              _as_str(eobj["head"], path + ".head")))
        graph = HostGraph(
            directed=gobj["directed"],
            vertices=tuple(_as_str(v, f"graph.vertices[{i}]")
                           for i, v in enumerate(gobj["vertices"])),
            edges=tuple(edges),
        )

    requests = []
    if not isinstance(doc["requests"], list):
        raise ParseError("requests: expected a list")
    for i, qobj in enumerate(doc["requests"]):
        path = f"requests[{i}]"
        if not isinstance(qobj, dict):
            raise ParseError(f"{path}: expected an object")
        _require_keys(qobj, {"id", "weights", "weight_all", "kind"}, {"id", "kind"}, path)
        weights = {}
        if "weights" in qobj:
            wobj = qobj["weights"]
            if not isinstance(wobj, dict):
                raise ParseError(f"{path}.weights: expected an object")
            weights = {e: _as_int(w, f"{path}.weights[{e!r}]") for e, w in wobj.items()}
        default_weight = 1
        if "weight_all" in qobj:
            default_weight = _as_int(qobj["weight_all"], path + ".weight_all")
        requests.append(Request(
            id=_as_int(qobj["id"], path + ".id"),
            kind=_parse_kind(qobj["kind"], path + ".kind"),
            weights=weights,
            default_weight=default_weight,
        ))

    try:
        return Instance(
            exponents=ExponentProfile(exponents_values),
            resources=tuple(resources),
            requests=tuple(requests),
            graph=graph,
        )
    except InstanceError as exc:
        raise ParseError(str(exc)) from exc


def parse_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance_text(fh.read())


# ---------------------------------------------------------------------------
# writer
# ---------------------------------------------------------------------------

def _kind_to_dict(kind) -> dict[str, Any]:
    out: dict[str, Any] = {"type": _KIND_TAGS[type(kind)]}
    if isinstance(kind, Routing):
        out["source"] = kind.source
        out["target"] = kind.target
    elif isinstance(kind, MultiRouting):
        out["pairs"] = [[s, t] for s, t in kind.pairs]
    elif isinstance(kind, SetConnectivity):
        out["terminals"] = list(kind.terminals)
    elif isinstance(kind, MachineChoice):
        out["machines"] = list(kind.machines)
    else:
        out["replies"] = [sorted(rep) for rep in kind.replies]
    return out


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "alphas": list(instance.exponents.alphas),
        "resources": [
            {"id": r.id, "sigma": r.sigma, "xis": list(r.xis)}
            for r in instance.resources
        ],
    }
    if instance.graph is not None:
        doc["graph"] = {
            "directed": instance.graph.directed,
            "vertices": list(instance.graph.vertices),
            "edges": [{"id": e.id, "tail": e.tail, "head": e.head}
                      for e in instance.graph.edges],
        }
    reqs = []
    for req in instance.requests:
        qobj: dict[str, Any] = {"id": req.id}
        if req.default_weight != 1:
            qobj["weight_all"] = req.default_weight
        if req.weights:
            qobj["weights"] = {e: req.weights[e] for e in sorted(req.weights)}
        qobj["kind"] = _kind_to_dict(req.kind)
        reqs.append(qobj)
    doc["requests"] = reqs
    return doc


def instance_to_text(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def write_instance(instance: Instance, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(instance_to_text(instance))
