"""Learning-based alternative for routing-only instances.

Each player runs follow-the-perturbed-leader over her cumulative
proportional-fair tolls: in every round she takes the cheapest path under
(cumulative toll + fresh uniform perturbation), all players move
simultaneously, and the output is the profile of a uniformly random round.
Costs are pre-scaled so every per-edge share lies in [0, 1], which the
regret bound needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import EnumerationLimits, candidate_replies
from .errors import ConfigError
from .instance import (
    HostGraph,
    Instance,
    ResourceParams,
    Routing,
    StrategyProfile,
    rep_cost,
    total_cost,
)
from .oracles import TOLL_FLOOR, routing_oracle
from .rng import keyed_rng

ROUNDS_CAP_DEFAULT = 100_000


@dataclass(frozen=True)
class FplConfig:
    seed: int = 0
    rounds: Optional[int] = None      # None: min(4 N^2 |V|^2 |E|, rounds_cap)
    rounds_cap: int = ROUNDS_CAP_DEFAULT
    eta: Optional[float] = None       # None: sqrt(rounds / |E|)
    lower_bound: Optional[float] = None   # known LB on the scaled optimum, report only
    max_paths: int = 10_000


@dataclass(frozen=True)
class RegretTraceRow:
    round: int
    player: int
    realized_toll: float
    best_fixed_toll: float


@dataclass(frozen=True)
class LApxResult:
    profile: StrategyProfile
    cost: float                         # on the original, unscaled instance
    regrets: tuple[float, ...]          # per player, in scaled toll units
    scale: float
    rounds: int
    theoretical_rounds: int
    eta: float
    chosen_round: int
    trace: tuple[RegretTraceRow, ...] = field(default=(), repr=False)


def theoretical_round_count(instance: Instance) -> int:
    n = instance.n_requests
    v = len(instance.graph.vertices)
    m = len(instance.graph.edges)
    return 4 * n * n * v * v * m


def normalize_costs(instance: Instance) -> tuple[Instance, float]:
    """Divide every sigma and factor by S = max_e F_e(sum_i max_e' w_i(e'))
    (clamped to >= 1) so any conceivable per-edge share lies in [0, 1]."""
    for req in instance.requests:
        if not isinstance(req.kind, Routing):
            raise ConfigError("cost normalization applies to routing-only instances")
    worst_load = sum(
        max(req.weight(res.id) for res in instance.resources)
        for req in instance.requests)
    scale = max(
        (rep_cost(res, instance.exponents, worst_load) for res in instance.resources),
        default=1.0)
    scale = max(scale, 1.0)
    scaled = Instance(
        exponents=instance.exponents,
        resources=tuple(
            ResourceParams(r.id, r.sigma / scale, tuple(x / scale for x in r.xis))
            for r in instance.resources),
        requests=instance.requests,
        graph=instance.graph,
    )
    return scaled, scale


def fpl_step(graph: HostGraph, source: str, target: str,
             cumulative: dict[str, float], eta: float,
             rng: np.random.Generator) -> frozenset[str]:
    """One perturbed-leader decision: cheapest path under cumulative tolls
    plus i.i.d. uniform [0, eta] noise per edge, drawn fresh."""
    edge_ids = sorted(e.id for e in graph.edges)
    noise = rng.uniform(0.0, eta, size=len(edge_ids))
    tolls = {
        eid: max(cumulative.get(eid, 0.0) + float(u), TOLL_FLOOR)
        for eid, u in zip(edge_ids, noise)
    }
    return routing_oracle(graph, source, target, tolls).reply


def _proportional_toll_row(scaled: Instance, profile: StrategyProfile,
                           position: int) -> dict[str, float]:
    """tau_i(e) = player i's proportional share on e with i joined to the
    round's users of e."""
    req = scaled.requests[position]
    loads = {res.id: 0 for res in scaled.resources}
    for pos, (other, reply) in enumerate(zip(scaled.requests, profile)):
        for e in reply:
            loads[e] += other.weight(e)
    row = {}
    for res in scaled.resources:
        w = req.weight(res.id)
        joined = loads[res.id] + (0 if res.id in profile[position] else w)
        row[res.id] = (w / joined) * rep_cost(res, scaled.exponents, joined)
    return row


def run_l_apx(instance: Instance, config: FplConfig = FplConfig(),
              collect_trace: bool = False) -> LApxResult:
    scaled, scale = normalize_costs(instance)
    graph = scaled.graph
    n = scaled.n_requests
    m = len(graph.edges)
    theoretical = theoretical_round_count(scaled)
    rounds = config.rounds if config.rounds is not None else min(theoretical, config.rounds_cap)
    if rounds < 1:
        raise ConfigError("round count must be >= 1")
    eta = config.eta if config.eta is not None else (rounds / m) ** 0.5
    if eta <= 0:
        raise ConfigError("perturbation scale must be positive")

    limits = EnumerationLimits(max_paths=config.max_paths)
    fixed_paths = [candidate_replies(scaled, req, limits) for req in scaled.requests]

    cumulative = [{res.id: 0.0 for res in scaled.resources} for _ in range(n)]
    path_totals = [
        {path: 0.0 for path in fixed_paths[pos]} for pos in range(n)
    ]
    realized = [0.0] * n
    profiles: list[StrategyProfile] = []
    trace: list[RegretTraceRow] = []

    for t in range(1, rounds + 1):
        replies = []
        for pos, req in enumerate(scaled.requests):
            rng = keyed_rng(config.seed, "fpl", t, req.id)
            replies.append(fpl_step(graph, req.kind.source, req.kind.target,
                                    cumulative[pos], eta, rng))
        profile = tuple(replies)
        profiles.append(profile)
        for pos, req in enumerate(scaled.requests):
            row = _proportional_toll_row(scaled, profile, pos)
            realized[pos] += sum(row[e] for e in profile[pos])
            for e, tau in row.items():
                cumulative[pos][e] += tau
            for path in fixed_paths[pos]:
                path_totals[pos][path] += sum(row[e] for e in path)
            if collect_trace:
                trace.append(RegretTraceRow(
                    round=t, player=req.id,
                    realized_toll=sum(row[e] for e in profile[pos]),
                    best_fixed_toll=min(path_totals[pos].values())))

    regrets = tuple(
        realized[pos] - min(path_totals[pos].values()) for pos in range(n))
    chosen = int(keyed_rng(config.seed, "output").integers(1, rounds + 1))
    out_profile = profiles[chosen - 1]
    return LApxResult(
        profile=out_profile,
        cost=total_cost(instance, out_profile),
        regrets=regrets,
        scale=scale,
        rounds=rounds,
        theoretical_rounds=theoretical,
        eta=eta,
        chosen_round=chosen,
        trace=tuple(trace),
    )


def regret_trace_to_csv(result: LApxResult) -> str:
    lines = ["round,player,realized_toll,best_fixed_toll"]
    for row in result.trace:
        lines.append(f"{row.round},{row.player},"
                     f"{format(row.realized_toll, '.9g')},{format(row.best_fixed_toll, '.9g')}")
    return "\n".join(lines) + "\n"
