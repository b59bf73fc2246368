"""Approximate best-response dynamics over the induced cost-sharing game.

One step: every player gets a toll function built from her (possibly
sampled) cost shares against the frozen previous profile, her oracle reply
under those tolls is her approximate best response, and

    delta_i = Ctilde_i(previous profile) - eps1 * Ctilde_i(reply, rest)

measures her scaled improvement, eps1 = (1+eps)/(1-eps).  If no delta is
positive the dynamics converge; otherwise one player updates:

* deterministic selection: the smallest index with delta_i > 0 and
  delta_i >= Delta/N (such a player always exists by pigeonhole);
* randomized selection: a uniformly random player updates iff her delta is
  positive, with the step budget inflated to N*T^2.

The run returns the cheapest profile seen (output mode "best") or the final
one ("last"), the full per-step trace, and the theoretical constants.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

from . import analysis
from .bounds import TheoreticalBounds, theoretical_bounds
from .errors import ConfigError, ExactShareLimitError, InfeasibleError
from .instance import Instance, StrategyProfile, rep_cost, total_cost
from .oracles import OracleAnswer, clamp_tolls, oracle_rho, reply_oracle
from .rng import keyed_rng
from .sharing import (
    EXACT_THRESHOLD_DEFAULT,
    MAX_SAMPLES_DEFAULT,
    MECHANISMS,
    ShareQuery,
    cost_share,
    rep_expansion_constants,
    whp_delta,
)


@dataclass(frozen=True)
class AbrdConfig:
    epsilon: float = 0.01
    seed: int = 0
    mechanism: str = "shapley-exact"
    selection: str = "deterministic"          # or "randomized"
    output: str = "best"                      # or "last"
    step_budget_override: Optional[int] = None
    rho: Optional[float] = None               # None: derived from the request kinds
    exact_threshold: int = EXACT_THRESHOLD_DEFAULT
    toll_floor: float = 1e-12
    max_samples: int = MAX_SAMPLES_DEFAULT

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ConfigError(f"unknown mechanism {self.mechanism!r}")
        if self.selection not in ("deterministic", "randomized"):
            raise ConfigError(f"unknown selection rule {self.selection!r}")
        if self.output not in ("best", "last"):
            raise ConfigError(f"unknown output mode {self.output!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.step_budget_override is not None and self.step_budget_override < 0:
            raise ConfigError("step budget override must be >= 0")


@dataclass(frozen=True)
class StepRecord:
    step: int
    player: Optional[int]                     # request id of the updated player
    deltas: Optional[tuple[float, ...]]       # positional, one per request
    delta_total: Optional[float]
    cost: float
    potential: Optional[float]
    converged: bool


@dataclass(frozen=True)
class RunResult:
    output_profile: StrategyProfile
    output_cost: float
    t_star: int
    best_cost: float
    trace: tuple[StepRecord, ...]
    profiles: tuple[StrategyProfile, ...]
    request_ids: tuple[int, ...]
    bounds: TheoreticalBounds
    converged_at: Optional[int]
    step_budget: int
    budget_overridden: bool
    mechanism: str
    selection: str
    output_mode: str
    seed: int
    opt_profile: Optional[StrategyProfile] = None
    opt_cost: Optional[float] = None

    @property
    def ratio(self) -> Optional[float]:
        if self.opt_cost is None:
            return None
        return self.output_cost / self.opt_cost


def derived_rho(instance: Instance) -> float:
    return max(oracle_rho(instance, req) for req in instance.requests)


def initial_profile(instance: Instance) -> StrategyProfile:
    """Each request answers the oracle under standalone tolls F_e(w_i(e))."""
    replies = []
    for req in instance.requests:
        tolls = {
            res.id: rep_cost(res, instance.exponents, req.weight(res.id))
            for res in instance.resources
        }
        replies.append(reply_oracle(instance, req, tolls).reply)
    return tuple(replies)


def _player_tolls(instance: Instance, config: AbrdConfig, profile: StrategyProfile,
                  position: int, step: int, planned_budget: int) -> dict[str, float]:
    """Tolls for one player: her share on each resource if she joined the
    others there.  For resources in her own reply this is exactly her current
    (estimated) share."""
    req = instance.requests[position]
    users_by_resource: dict[str, list[tuple[int, int]]] = {}
    for pos, (other, reply) in enumerate(zip(instance.requests, profile)):
        if pos == position:
            continue
        for e in reply:
            users_by_resource.setdefault(e, []).append((other.id, other.weight(e)))

    n_res = len(instance.resources)
    tolls = {}
    for res in instance.resources:
        users = tuple(users_by_resource.get(res.id, ())) + ((req.id, req.weight(res.id)),)
        query = ShareQuery(res, instance.exponents, users, target=req.id)
        if config.mechanism == "shapley-sampled":
            share = cost_share(
                config.mechanism, query,
                epsilon=config.epsilon,
                delta=whp_delta(planned_budget, instance.n_requests, n_res),
                rng=keyed_rng(config.seed, "share", step, req.id, res.id),
                max_samples=config.max_samples)
        else:
            share = cost_share(config.mechanism, query,
                               exact_threshold=config.exact_threshold)
        tolls[res.id] = share
    return clamp_tolls(tolls, config.toll_floor)


def approximate_best_response(instance: Instance, config: AbrdConfig, position: int,
                              profile: StrategyProfile, step: int = 0,
                              planned_budget: int = 1) -> tuple[OracleAnswer, float]:
    """ABR of one player to everybody else's replies in ``profile``.

    Returns the oracle answer (whose toll_total is the player's estimated
    cost at the new reply) together with her estimated current cost.
    """
    tolls = _player_tolls(instance, config, profile, position, step, planned_budget)
    answer = reply_oracle(instance, instance.requests[position], tolls)
    current = sum(tolls[e] for e in profile[position])
    return answer, current


@dataclass(frozen=True)
class DeltaPass:
    deltas: tuple[float, ...]
    total: float
    proposals: tuple[OracleAnswer, ...]


def delta_vector(instance: Instance, config: AbrdConfig, profile: StrategyProfile,
                 step: int = 1, planned_budget: int = 1) -> DeltaPass:
    """Fresh ABRs and improvement estimates for every player against the
    profile."""
    eps1 = (1.0 + config.epsilon) / (1.0 - config.epsilon)
    deltas = []
    proposals = []
    for pos in range(instance.n_requests):
        answer, current = approximate_best_response(
            instance, config, pos, profile, step, planned_budget)
        deltas.append(current - eps1 * answer.toll_total)
        proposals.append(answer)
    return DeltaPass(deltas=tuple(deltas), total=sum(deltas), proposals=tuple(proposals))


def _maybe_potential(instance: Instance, config: AbrdConfig,
                     profile: StrategyProfile) -> Optional[float]:
    if config.mechanism == "proportional":
        return None
    try:
        return analysis.potential(instance, profile, config.exact_threshold)
    except ExactShareLimitError:
        return None


def run_abrd(instance: Instance, config: AbrdConfig,
             brute_force: Optional[Callable[[Instance], tuple[StrategyProfile, float]]] = None,
             ) -> RunResult:
    constants = rep_expansion_constants(config.mechanism, instance.exponents)
    rho = config.rho if config.rho is not None else derived_rho(instance)
    bounds = theoretical_bounds(instance, rho, config.epsilon, constants)

    planned = bounds.T
    if config.selection == "randomized":
        planned = instance.n_requests * bounds.T ** 2
    overridden = config.step_budget_override is not None
    budget = config.step_budget_override if overridden else planned

    profile = initial_profile(instance)
    profiles = [profile]
    trace = [StepRecord(step=0, player=None, deltas=None, delta_total=None,
                        cost=total_cost(instance, profile),
                        potential=_maybe_potential(instance, config, profile),
                        converged=False)]
    converged_at = None

    for t in range(1, budget + 1):
        try:
            dpass = delta_vector(instance, config, profile, step=t,
                                 planned_budget=max(1, budget))
        except InfeasibleError as exc:
            # cannot happen for well-formed instances (feasibility does not
            # depend on tolls), but the partial trace is attached for callers
            exc.partial_trace = tuple(trace)
            raise
        if all(d <= 0.0 for d in dpass.deltas):
            converged_at = t
            profiles.append(profile)
            trace.append(StepRecord(
                step=t, player=None, deltas=dpass.deltas, delta_total=dpass.total,
                cost=trace[-1].cost, potential=trace[-1].potential, converged=True))
            break

        chosen = None
        if config.selection == "deterministic":
            threshold = dpass.total / instance.n_requests
            for pos, d in enumerate(dpass.deltas):
                if d > 0.0 and d >= threshold:
                    chosen = pos
                    break
        else:
            pick = int(keyed_rng(config.seed, "select", t).integers(instance.n_requests))
            if dpass.deltas[pick] > 0.0:
                chosen = pick

        if chosen is None:
            # randomized selection drew a player with no improvement
            profiles.append(profile)
            trace.append(StepRecord(
                step=t, player=None, deltas=dpass.deltas, delta_total=dpass.total,
                cost=trace[-1].cost, potential=trace[-1].potential, converged=False))
            continue

        profile = tuple(
            dpass.proposals[chosen].reply if i == chosen else r
            for i, r in enumerate(profile))
        profiles.append(profile)
        trace.append(StepRecord(
            step=t, player=instance.requests[chosen].id,
            deltas=dpass.deltas, delta_total=dpass.total,
            cost=total_cost(instance, profile),
            potential=_maybe_potential(instance, config, profile),
            converged=False))

    t_star = min(range(len(trace)), key=lambda i: (trace[i].cost, i))
    best_cost = trace[t_star].cost
    out_idx = t_star if config.output == "best" else len(trace) - 1
    result = RunResult(
        output_profile=profiles[out_idx],
        output_cost=trace[out_idx].cost,
        t_star=t_star,
        best_cost=best_cost,
        trace=tuple(trace),
        profiles=tuple(profiles),
        request_ids=tuple(req.id for req in instance.requests),
        bounds=bounds,
        converged_at=converged_at,
        step_budget=budget,
        budget_overridden=overridden,
        mechanism=config.mechanism,
        selection=config.selection,
        output_mode=config.output,
        seed=config.seed,
    )
    if brute_force is not None:
        opt_profile, opt_cost = brute_force(instance)
        result = replace(result, opt_profile=opt_profile, opt_cost=opt_cost)
    return result


# ---------------------------------------------------------------------------
# trace and report emission
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return format(value, ".9g")


def trace_to_csv(result: RunResult) -> str:
    """Columns: step, player, delta_selected, Delta, cost, potential,
    converged.  The step-0 row and rows without an update leave the player
    and delta_selected fields empty."""
    position_of = {rid: pos for pos, rid in enumerate(result.request_ids)}
    lines = ["step,player,delta_selected,Delta,cost,potential,converged"]
    for rec in result.trace:
        player = "" if rec.player is None else str(rec.player)
        if rec.player is None or rec.deltas is None:
            delta_sel = ""
        else:
            delta_sel = _fmt(rec.deltas[position_of[rec.player]])
        delta_total = "" if rec.delta_total is None else _fmt(rec.delta_total)
        pot = "" if rec.potential is None else _fmt(rec.potential)
        lines.append(",".join([
            str(rec.step), player, delta_sel, delta_total,
            _fmt(rec.cost), pot, "true" if rec.converged else "false"]))
    return "\n".join(lines) + "\n"


def run_report(instance: Instance, result: RunResult) -> str:
    b = result.bounds
    lines = [
        "abrd run report",
        f"  mechanism        {result.mechanism}",
        f"  selection        {result.selection}",
        f"  output mode      {result.output_mode}",
        f"  seed             {result.seed}",
        f"  players          {instance.n_requests}",
        f"  resources        {len(instance.resources)}",
        f"  rho              {_fmt(b.rho)}",
        f"  epsilon1         {_fmt(b.epsilon1)}",
        f"  gamma_alpha      {_fmt(b.gamma_alpha)}",
        f"  lambda_alpha     {_fmt(b.lambda_alpha)}",
        f"  lambda           {_fmt(b.lam)}",
        f"  mu               {_fmt(b.mu)}",
        f"  A (harmonic)     {_fmt(b.A)}",
        f"  B (ceil alpha)   {_fmt(b.B)}",
        f"  Q                {_fmt(b.Q)}",
        f"  T (step budget)  {b.T}",
        f"  ratio bound      {_fmt(b.ratio_bound)}",
        f"  budget used      {result.step_budget}"
        + ("  (override; ratio guarantee void)" if result.budget_overridden else ""),
    ]
    if result.mechanism == "shapley-sampled":
        fail = 1.0 / (2.0 * max(1, result.step_budget)
                      * instance.n_requests * len(instance.resources))
        lines.append(f"  sampling failure probability <= {_fmt(fail)}")
    lines.append(f"  steps recorded   {len(result.trace) - 1}")
    lines.append("  converged        "
                 + (f"at step {result.converged_at}" if result.converged_at else "no"))
    lines.append(f"  t*               {result.t_star}")
    lines.append(f"  initial cost     {_fmt(result.trace[0].cost)}")
    lines.append(f"  best cost        {_fmt(result.best_cost)}")
    lines.append(f"  output cost      {_fmt(result.output_cost)}")
    if result.opt_cost is not None:
        lines.append(f"  brute-force opt  {_fmt(result.opt_cost)}")
        lines.append(f"  empirical ratio  {_fmt(result.ratio)}")
    return "\n".join(lines) + "\n"


def result_to_json_dict(instance: Instance, result: RunResult) -> dict:
    """Machine-readable mirror of the plain-text run report."""
    b = result.bounds
    out = {
        "mechanism": result.mechanism,
        "selection": result.selection,
        "output_mode": result.output_mode,
        "seed": result.seed,
        "players": instance.n_requests,
        "resources": len(instance.resources),
        "bounds": {
            "rho": b.rho, "epsilon1": b.epsilon1, "gamma_alpha": b.gamma_alpha,
            "lambda_alpha": b.lambda_alpha, "lambda": b.lam, "mu": b.mu,
            "A": b.A, "B": b.B, "Q": b.Q, "T": b.T, "ratio_bound": b.ratio_bound,
        },
        "step_budget": result.step_budget,
        "budget_overridden": result.budget_overridden,
        "steps_recorded": len(result.trace) - 1,
        "converged_at": result.converged_at,
        "t_star": result.t_star,
        "initial_cost": result.trace[0].cost,
        "best_cost": result.best_cost,
        "output_cost": result.output_cost,
        "output_profile": [sorted(r) for r in result.output_profile],
    }
    if result.opt_cost is not None:
        out["opt_cost"] = result.opt_cost
        out["ratio"] = result.ratio
    return out
