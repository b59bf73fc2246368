"""Verification suite: potential function, brute-force optimum, equilibrium
enumeration, smoothness checks and the worst-case instance family.

Everything here is read-only over an instance and a mechanism with exact
shares.  Enumerations refuse (never silently truncate) when the configured
limits would be exceeded, so derived expected values stay trustworthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

from .bounds import harmonic
from .errors import ConfigError, EnumerationLimitError, ExactShareLimitError, InstanceError
from .instance import (
    Edge,
    ExplicitReplies,
    ExponentProfile,
    HostGraph,
    Instance,
    MachineChoice,
    Request,
    ResourceParams,
    Routing,
    StrategyProfile,
    rep_cost,
    total_cost,
    validate_reply,
)
from .rng import keyed_rng
from .sharing import (
    EXACT_THRESHOLD_DEFAULT,
    ShareQuery,
    h_value,
    proportional_share,
    shapley_exact,
)

REL_TOL = 1e-9
ABS_TOL = 1e-12


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= max(REL_TOL * max(abs(a), abs(b)), ABS_TOL)


def resource_users(instance: Instance, profile: StrategyProfile,
                   resource_id: str) -> tuple[tuple[int, int], ...]:
    users = []
    for req, reply in zip(instance.requests, profile):
        if resource_id in reply:
            users.append((req.id, req.weight(resource_id)))
    return tuple(users)


def player_cost(instance: Instance, mechanism: str, profile: StrategyProfile,
                position: int, exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> float:
    """Individual cost of one player under an exact mechanism."""
    req = instance.requests[position]
    total = 0.0
    for e in sorted(profile[position]):
        query = ShareQuery(instance.resource_by_id[e], instance.exponents,
                           resource_users(instance, profile, e), target=req.id)
        if mechanism == "proportional":
            total += proportional_share(query)
        elif mechanism == "shapley-exact":
            total += shapley_exact(query, exact_threshold)
        else:
            raise ConfigError(f"exact analysis needs an exact mechanism, got {mechanism!r}")
    return total


# ---------------------------------------------------------------------------
# potential function
# ---------------------------------------------------------------------------

def potential(instance: Instance, profile: StrategyProfile,
              exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> float:
    """Potential of the Shapley-sharing game, by the order-free subset form

        Phi = sum_e sum_{k=1}^{|S_e|} [ sigma_e/k
              + sum_{T subset of S_e, |T|=k} h_e(T) / (C(|S_e|,k) k) ].
    """
    total = 0.0
    for res in instance.resources:
        users = resource_users(instance, profile, res.id)
        n = len(users)
        if n == 0:
            continue
        if n > exact_threshold:
            raise ExactShareLimitError(
                f"resource {res.id!r} carries {n} users, above the exact threshold")
        weights = [w for _, w in users]
        total += res.sigma * harmonic(n)
        for k in range(1, n + 1):
            coeff = 1.0 / (math.comb(n, k) * k)
            total += coeff * sum(
                h_value(res, instance.exponents, sum(subset))
                for subset in combinations(weights, k))
    return total


def potential_by_prefix(instance: Instance, profile: StrategyProfile,
                        orders: Optional[dict[str, Sequence[int]]] = None,
                        exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> float:
    """Potential by the prefix definition: for an arbitrary fixed order of
    each resource's users, sum each user's exact share within the prefix
    ending at her.  Agrees with :func:`potential` for every order."""
    total = 0.0
    for res in instance.resources:
        users = dict(resource_users(instance, profile, res.id))
        if not users:
            continue
        order = tuple(orders[res.id]) if orders and res.id in orders else tuple(sorted(users))
        if sorted(order) != sorted(users):
            raise InstanceError(f"order for resource {res.id!r} must permute its users")
        for m, rid in enumerate(order):
            prefix = tuple((j, users[j]) for j in order[:m + 1])
            query = ShareQuery(res, instance.exponents, prefix, target=rid)
            total += shapley_exact(query, exact_threshold)
    return total


@dataclass(frozen=True)
class PotentialBoundsReport:
    profiles_tested: int
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def potential_bounds_check(instance: Instance, profiles: Iterable[StrategyProfile],
                           exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> PotentialBoundsReport:
    """Check C(p)/ceil(alpha_max) <= Phi(p) <= H_N * C(p) on each profile."""
    b = math.ceil(instance.exponents.alpha_max)
    a = harmonic(instance.n_requests)
    tested = violations = 0
    for p in profiles:
        tested += 1
        c = total_cost(instance, p)
        phi = potential(instance, p, exact_threshold)
        slack = REL_TOL * max(c, phi, 1.0)
        if not (c / b <= phi + slack and phi <= a * c + slack):
            violations += 1
    return PotentialBoundsReport(profiles_tested=tested, violations=violations)


@dataclass(frozen=True)
class ExactnessCheck:
    delta_potential: float
    delta_cost: float

    @property
    def ok(self) -> bool:
        return _close(self.delta_potential, self.delta_cost)


def potential_exactness_check(instance: Instance, profile: StrategyProfile,
                              position: int, new_reply: frozenset[str],
                              exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> ExactnessCheck:
    """Under exact Shapley shares a unilateral deviation changes the potential
    by exactly the deviator's cost change."""
    deviated = tuple(new_reply if i == position else r for i, r in enumerate(profile))
    dphi = (potential(instance, deviated, exact_threshold)
            - potential(instance, profile, exact_threshold))
    dcost = (player_cost(instance, "shapley-exact", deviated, position, exact_threshold)
             - player_cost(instance, "shapley-exact", profile, position, exact_threshold))
    return ExactnessCheck(delta_potential=dphi, delta_cost=dcost)


# ---------------------------------------------------------------------------
# strategy-space enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnumerationLimits:
    max_paths: int = 10_000
    max_subset_edges: int = 12
    max_profiles: int = 10_000_000


def _simple_paths(graph: HostGraph, source: str, target: str,
                  max_paths: int) -> list[frozenset[str]]:
    out: list[frozenset[str]] = []

    def dfs(u: str, visited: set[str], edges: tuple[str, ...]):
        if u == target:
            out.append(frozenset(edges))
            if len(out) > max_paths:
                raise EnumerationLimitError(
                    f"more than {max_paths} simple paths from {source!r} to {target!r}")
            return
        for v, eid in graph.adjacency[u]:
            if v in visited:
                continue
            visited.add(v)
            dfs(v, visited, edges + (eid,))
            visited.remove(v)

    dfs(source, {source}, ())
    seen: set[frozenset[str]] = set()
    unique = []
    for p in out:
        if p not in seen:
            seen.add(p)
            unique.append(p)
    return unique


def candidate_replies(instance: Instance, request: Request,
                      limits: EnumerationLimits = EnumerationLimits()) -> list[frozenset[str]]:
    """The full reply collection of a request, enumerated deterministically.

    Refuses with EnumerationLimitError when the configured caps would be
    exceeded.
    """
    kind = request.kind
    if isinstance(kind, ExplicitReplies):
        return list(kind.replies)
    if isinstance(kind, MachineChoice):
        return [frozenset({m}) for m in kind.machines]
    graph = instance.graph
    if isinstance(kind, Routing):
        return _simple_paths(graph, kind.source, kind.target, limits.max_paths)
    edge_ids = sorted(e.id for e in graph.edges)
    if len(edge_ids) > limits.max_subset_edges:
        raise EnumerationLimitError(
            f"{len(edge_ids)} edges exceed the subset-enumeration cap {limits.max_subset_edges}")
    out = []
    for mask in range(1, 1 << len(edge_ids)):
        reply = frozenset(edge_ids[i] for i in range(len(edge_ids)) if mask >> i & 1)
        if validate_reply(instance, request, reply):
            out.append(reply)
    return out


def enumerate_profiles(instance: Instance,
                       limits: EnumerationLimits = EnumerationLimits()) -> tuple[
                           list[list[frozenset[str]]], int]:
    candidates = [candidate_replies(instance, req, limits) for req in instance.requests]
    count = 1
    for c in candidates:
        count *= len(c)
        if count > limits.max_profiles:
            raise EnumerationLimitError(
                f"profile space exceeds {limits.max_profiles}; refusing to enumerate")
    return candidates, count


def brute_force_opt(instance: Instance,
                    limits: EnumerationLimits = EnumerationLimits()) -> tuple[StrategyProfile, float]:
    """Exact minimizer of the total cost over the full profile space."""
    candidates, _ = enumerate_profiles(instance, limits)
    best_profile, best_cost = None, math.inf
    for combo in product(*candidates):
        cost = total_cost(instance, combo)
        if cost < best_cost:
            best_profile, best_cost = combo, cost
    return tuple(best_profile), best_cost


# ---------------------------------------------------------------------------
# equilibria and the price of anarchy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoaReport:
    nash_profiles: tuple[StrategyProfile, ...]
    worst_nash_cost: Optional[float]
    opt_profile: StrategyProfile
    opt_cost: float

    @property
    def poa(self) -> Optional[float]:
        if self.worst_nash_cost is None:
            return None
        return self.worst_nash_cost / self.opt_cost


def _iter_equilibrium_rows(instance: Instance, mechanism: str,
                           limits: EnumerationLimits,
                           exact_threshold: int):
    """Yield (profile, cost, is_nash) for every enumerable profile."""
    candidates, _ = enumerate_profiles(instance, limits)
    for combo in product(*candidates):
        profile = tuple(combo)
        is_nash = True
        for pos in range(instance.n_requests):
            own = player_cost(instance, mechanism, profile, pos, exact_threshold)
            for alt in candidates[pos]:
                if alt == profile[pos]:
                    continue
                trial = tuple(alt if i == pos else r for i, r in enumerate(profile))
                if player_cost(instance, mechanism, trial, pos, exact_threshold) < own - 1e-9:
                    is_nash = False
                    break
            if not is_nash:
                break
        yield profile, total_cost(instance, profile), is_nash


def enumerate_nash(instance: Instance, mechanism: str,
                   limits: EnumerationLimits = EnumerationLimits(),
                   exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> PoaReport:
    """All pure equilibria under an exact mechanism, against the deviation
    space given by the enumerated reply collections."""
    nash: list[StrategyProfile] = []
    worst = None
    for profile, cost, is_nash in _iter_equilibrium_rows(
            instance, mechanism, limits, exact_threshold):
        if is_nash:
            nash.append(profile)
            worst = cost if worst is None else max(worst, cost)
    opt_profile, opt_cost = brute_force_opt(instance, limits)
    return PoaReport(nash_profiles=tuple(nash), worst_nash_cost=worst,
                     opt_profile=opt_profile, opt_cost=opt_cost)


def _profile_label(profile: StrategyProfile) -> str:
    return ";".join("|".join(sorted(reply)) for reply in profile)


def nash_report_csv(instance: Instance, mechanism: str,
                    limits: EnumerationLimits = EnumerationLimits(),
                    exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> str:
    """One row per enumerated profile: its cost and whether it is a NE."""
    lines = ["profile,cost,is_nash"]
    for profile, cost, is_nash in _iter_equilibrium_rows(
            instance, mechanism, limits, exact_threshold):
        lines.append(f"{_profile_label(profile)},{format(cost, '.9g')},"
                     f"{'true' if is_nash else 'false'}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# smoothness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothnessReport:
    lam: float
    mu: float
    pairs_tested: int
    max_ratio: float
    violations: int
    worst_pair: Optional[tuple[StrategyProfile, StrategyProfile]] = None

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _profile_at(candidates: list[list[frozenset[str]]], index: int) -> StrategyProfile:
    out = []
    for cands in candidates:
        index, pick = divmod(index, len(cands))
        out.append(cands[pick])
    return tuple(out)


def _iter_smoothness_rows(instance: Instance, mechanism: str, lam: float, mu: float,
                          limits: EnumerationLimits, max_pairs: int, seed: int,
                          exact_threshold: int):
    """Yield (p, p', lhs, C(p), C(p'), ok) over the checked pairs."""
    candidates, count = enumerate_profiles(instance, limits)

    if count * count <= max_pairs:
        profiles = [tuple(c) for c in product(*candidates)]
        pairs = ((p, p2) for p in profiles for p2 in profiles)
    else:
        rng = keyed_rng(seed, "smoothness")
        pairs = (
            (_profile_at(candidates, int(rng.integers(count))),
             _profile_at(candidates, int(rng.integers(count))))
            for _ in range(max_pairs)
        )

    for p, p_prime in pairs:
        lhs = 0.0
        for pos in range(instance.n_requests):
            trial = tuple(p_prime[pos] if i == pos else r for i, r in enumerate(p))
            lhs += player_cost(instance, mechanism, trial, pos, exact_threshold)
        c_p = total_cost(instance, p)
        c_prime = total_cost(instance, p_prime)
        slack = REL_TOL * max(lhs, lam * c_prime + mu * c_p, 1.0)
        ok = lhs <= lam * c_prime + mu * c_p + slack
        yield p, p_prime, lhs, c_p, c_prime, ok


def smoothness_check(instance: Instance, mechanism: str, lam: float, mu: float,
                     limits: EnumerationLimits = EnumerationLimits(),
                     max_pairs: int = 10_000, seed: int = 0,
                     exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> SmoothnessReport:
    """Verify sum_i C_i(p'_i, p_{-i}) <= lam*C(p') + mu*C(p) over ordered
    profile pairs: exhaustively when the pair count fits max_pairs, otherwise
    on a seeded sample."""
    max_ratio = -math.inf
    violations = 0
    tested = 0
    worst = None
    for p, p_prime, lhs, c_p, c_prime, ok in _iter_smoothness_rows(
            instance, mechanism, lam, mu, limits, max_pairs, seed, exact_threshold):
        tested += 1
        ratio = (lhs - mu * c_p) / c_prime
        if ratio > max_ratio:
            max_ratio = ratio
            worst = (p, p_prime)
        if not ok:
            violations += 1
    return SmoothnessReport(lam=lam, mu=mu, pairs_tested=tested,
                            max_ratio=max_ratio, violations=violations, worst_pair=worst)


def smoothness_report_csv(instance: Instance, mechanism: str, lam: float, mu: float,
                          limits: EnumerationLimits = EnumerationLimits(),
                          max_pairs: int = 10_000, seed: int = 0,
                          exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> str:
    """One row per checked pair: deviation sum, both costs, verdict."""
    lines = ["profile,deviation_profile,deviation_sum,cost_p,cost_p_prime,ok"]
    for p, p_prime, lhs, c_p, c_prime, ok in _iter_smoothness_rows(
            instance, mechanism, lam, mu, limits, max_pairs, seed, exact_threshold):
        lines.append(
            f"{_profile_label(p)},{_profile_label(p_prime)},"
            f"{format(lhs, '.9g')},{format(c_p, '.9g')},{format(c_prime, '.9g')},"
            f"{'true' if ok else 'false'}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# budget balance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BudgetBalanceReport:
    queries_tested: int
    max_rel_gap: float

    @property
    def ok(self) -> bool:
        return self.max_rel_gap <= REL_TOL


def budget_balance_check(mechanism: str,
                         queries: Iterable[tuple[ResourceParams, ExponentProfile,
                                                 tuple[tuple[int, int], ...]]],
                         exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> BudgetBalanceReport:
    """Shares on each queried resource must sum to its cost exactly."""
    tested = 0
    worst = 0.0
    for res, exp, users in queries:
        tested += 1
        total = 0.0
        for rid, _ in users:
            q = ShareQuery(res, exp, users, target=rid)
            if mechanism == "proportional":
                total += proportional_share(q)
            else:
                total += shapley_exact(q, exact_threshold)
        full = rep_cost(res, exp, sum(w for _, w in users))
        worst = max(worst, abs(total - full) / max(abs(full), ABS_TOL))
    return BudgetBalanceReport(queries_tested=tested, max_rel_gap=worst)


# ---------------------------------------------------------------------------
# worst-case family
# ---------------------------------------------------------------------------

def poa_lower_bound_instance(sigma: float, xi: float, alpha: float, q: int = 1,
                             tail_alphas: Optional[Sequence[float]] = None,
                             tail_xi_scale: float = 0.1) -> Instance:
    """Hub-and-spoke family with a price of anarchy of at least N/3.

    N = (sigma/xi)^(1/alpha) unit-weight routing requests share a source s.
    Each request i can go directly (edge e{i}, cost parameters sigma, xi) or
    through the hub (edge estar priced at N/(N+1) of (sigma, xi), then f{i}
    priced at sigma/(N+1) with factor 3 xi/(N+1)).  All going direct is an
    equilibrium; all going through the hub costs less than 3(sigma + xi).

    For q >= 2 the extra exponents default to 1 + (alpha-1)/2 with factors at
    tail_xi_scale of the strict admissibility bound xi_1/(q N^alpha_j (N+1)).
    """
    if sigma <= 0 or xi <= 0:
        raise ConfigError("sigma and xi must be positive")
    if alpha <= 1:
        raise ConfigError("alpha must exceed 1")
    n_real = (sigma / xi) ** (1.0 / alpha)
    n = round(n_real)
    if n < 2 or abs(n_real - n) > 1e-9 * max(1.0, n):
        suggestion = xi * max(2, round(n_real)) ** alpha
        raise ConfigError(
            f"(sigma/xi)^(1/alpha) = {n_real:.6g} is not an integer >= 2; "
            f"nearest valid sigma is {suggestion:.9g}")

    if tail_alphas is None:
        tail_alphas = [1.0 + (alpha - 1.0) / 2.0] * (q - 1)
    tail_alphas = list(tail_alphas)
    if len(tail_alphas) != q - 1:
        raise ConfigError(f"expected {q - 1} tail exponents, got {len(tail_alphas)}")
    for a in tail_alphas:
        if not 1.0 < a < alpha:
            raise ConfigError(f"tail exponents must lie strictly between 1 and {alpha}")
    alphas = (alpha, *tail_alphas)

    def xi_vector(xi1: float) -> tuple[float, ...]:
        tails = tuple(
            tail_xi_scale * xi1 / (q * float(n) ** a * (n + 1))
            for a in tail_alphas
        )
        return (xi1, *tails)

    frac = n / (n + 1.0)
    resources = [ResourceParams("estar", sigma * frac, xi_vector(xi * frac))]
    edges = [Edge("estar", "s", "tstar")]
    requests = []
    for i in range(1, n + 1):
        resources.append(ResourceParams(f"e{i}", sigma, xi_vector(xi)))
        resources.append(ResourceParams(f"f{i}", sigma / (n + 1.0),
                                        xi_vector(3.0 * xi / (n + 1.0))))
        edges.append(Edge(f"e{i}", "s", f"t{i}"))
        edges.append(Edge(f"f{i}", "tstar", f"t{i}"))
        requests.append(Request(id=i, kind=Routing("s", f"t{i}")))
    graph = HostGraph(directed=True,
                      vertices=("s", "tstar", *(f"t{i}" for i in range(1, n + 1))),
                      edges=tuple(edges))
    return Instance(exponents=ExponentProfile(alphas), resources=tuple(resources),
                    requests=tuple(requests), graph=graph)
