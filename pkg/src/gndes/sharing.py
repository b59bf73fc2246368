"""Separable, uniform cost-sharing mechanisms.

A mechanism splits each resource's cost F_e(l_e) among the requests using it,
as a function of the weight multiset on that resource alone.  Implemented
here:

* proportional: a user pays (w_i / l_e) * F_e(l_e), exactly.
* Shapley, exact: expected marginal contribution over a uniformly random
  arrival order, computed by the subset-coefficient formula.
* Shapley, sampled: the startup part sigma_e/|S_e| is exact; the power part
  is estimated by averaging marginal contributions over sampled uniform
  permutations, with a Hoeffding sample count giving a multiplicative
  (1 +- epsilon) guarantee at a configured confidence.

Both exact mechanisms are budget balanced: the shares on a resource sum to
its cost.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, ExactShareLimitError, InstanceError
from .instance import ExponentProfile, ResourceParams, rep_cost

logger = logging.getLogger(__name__)

EXACT_THRESHOLD_DEFAULT = 12
MAX_SAMPLES_DEFAULT = 200_000

MECHANISMS = ("proportional", "shapley-exact", "shapley-sampled")


@dataclass(frozen=True)
class ShareQuery:
    """The per-resource view a mechanism consumes.

    ``users`` is the multiset of (request id, weight on this resource) for
    every request whose reply contains the resource; ``target`` must be one
    of those ids.
    """

    resource: ResourceParams
    exponents: ExponentProfile
    users: tuple[tuple[int, int], ...]
    target: int

    def __post_init__(self):
        users = tuple(sorted((int(i), int(w)) for i, w in self.users))
        object.__setattr__(self, "users", users)
        ids = [i for i, _ in users]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate request ids in a share query")
        if self.target not in set(ids):
            raise InstanceError(f"target {self.target} is not among the resource's users")
        for _, w in users:
            if w < 1:
                raise InstanceError("weights must be >= 1")

    @property
    def target_weight(self) -> int:
        for i, w in self.users:
            if i == self.target:
                return w
        raise AssertionError("unreachable")

    @property
    def load(self) -> int:
        return sum(w for _, w in self.users)


def h_value(resource: ResourceParams, exponents: ExponentProfile, weight_sum: float) -> float:
    """Pure power part of the cost: sum_j xi_j * weight_sum**alpha_j, 0 at 0."""
    if weight_sum < 0:
        raise InstanceError("weight sum must be >= 0")
    if weight_sum == 0:
        return 0.0
    return sum(xi * float(weight_sum) ** a
               for xi, a in zip(resource.xis, exponents.alphas) if xi)


def proportional_share(query: ShareQuery) -> float:
    load = query.load
    full = rep_cost(query.resource, query.exponents, load)
    return (query.target_weight / load) * full


def shapley_exact(query: ShareQuery, exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> float:
    """Exact Shapley share via the subset-coefficient formula.

    O(2^{n-1}) over the other users' subsets; refused above the threshold,
    where the sampled variant must be used instead.
    """
    n = len(query.users)
    if n > exact_threshold:
        raise ExactShareLimitError(
            f"{n} users exceed the exact threshold {exact_threshold}; use shapley_sampled")
    res, exp = query.resource, query.exponents
    w_target = query.target_weight
    others = [w for i, w in query.users if i != query.target]
    m = len(others)
    fact = [math.factorial(k) for k in range(n + 1)]
    inv_nfact = 1.0 / fact[n]

    # group subsets of the others by (size, weight sum); coefficients depend
    # only on the size, marginals only on the sum
    sums_by_size: list[dict[int, int]] = [dict() for _ in range(m + 1)]
    sums_by_size[0][0] = 1
    for mask in range(1, 1 << m):
        size = mask.bit_count()
        total = 0
        mm = mask
        while mm:
            bit = mm & -mm
            total += others[bit.bit_length() - 1]
            mm ^= bit
        sums_by_size[size][total] = sums_by_size[size].get(total, 0) + 1

    shapley_h = 0.0
    for size, sums in enumerate(sums_by_size):
        coeff = fact[size] * fact[n - 1 - size] * inv_nfact
        for total, count in sums.items():
            marginal = (h_value(res, exp, total + w_target) - h_value(res, exp, total))
            shapley_h += coeff * count * marginal
    return res.sigma / n + shapley_h


def hoeffding_sample_count(query: ShareQuery, epsilon: float, delta: float,
                           max_samples: int = MAX_SAMPLES_DEFAULT) -> int:
    """Permutations needed so the estimate is within (1 +- epsilon) of the
    true share with probability >= 1 - delta.

    Each sampled marginal lies in [0, h(S_e)] and the true share is at least
    sigma/|S_e| + h({target}), so an additive error of epsilon times that
    lower bound suffices.  Capped at max_samples with a logged warning.
    """
    if not 0 < epsilon < 1:
        raise ConfigError("epsilon must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ConfigError("confidence delta must lie in (0, 1)")
    res, exp = query.resource, query.exponents
    n = len(query.users)
    spread = h_value(res, exp, query.load)
    lower = res.sigma / n + h_value(res, exp, query.target_weight)
    m = math.ceil(spread * spread * math.log(2.0 / delta) / (2.0 * (epsilon * lower) ** 2))
    m = max(1, m)
    if m > max_samples:
        logger.warning(
            "sample count %d for resource %r capped at %d; the epsilon guarantee is void",
            m, res.id, max_samples)
        m = max_samples
    return m


def shapley_sampled(query: ShareQuery, epsilon: float, delta: float,
                    rng: np.random.Generator,
                    max_samples: int = MAX_SAMPLES_DEFAULT) -> float:
    """Sampled Shapley share: sigma/|S_e| plus the mean marginal of the power
    part over Hoeffding-many uniform random permutations."""
    n = len(query.users)
    res, exp = query.resource, query.exponents
    if n == 1:
        # sole user: every permutation yields the same marginal
        return res.sigma + h_value(res, exp, query.target_weight)
    m = hoeffding_sample_count(query, epsilon, delta, max_samples)

    weights = np.array([w for _, w in query.users], dtype=np.float64)
    target_index = next(k for k, (i, _) in enumerate(query.users) if i == query.target)
    perms = rng.permuted(np.tile(np.arange(n), (m, 1)), axis=1)
    csum = np.cumsum(weights[perms], axis=1)
    tpos = np.argmax(perms == target_index, axis=1)
    after = csum[np.arange(m), tpos]
    before = after - weights[target_index]

    def h_vec(x):
        out = np.zeros_like(x)
        positive = x > 0
        for xi, a in zip(res.xis, exp.alphas):
            if xi:
                out[positive] += xi * np.power(x[positive], a)
        return out

    marginals = h_vec(after) - h_vec(before)
    return res.sigma / n + float(marginals.mean())


def whp_delta(steps: int, n_requests: int, n_resources: int) -> float:
    """Per-share failure probability so that all T*N*|E| shares of a run are
    within band with high probability."""
    return 1.0 / (2.0 * (max(1, steps) * n_requests * n_resources) ** 2)


def cost_share(mechanism: str, query: ShareQuery, *,
               epsilon: Optional[float] = None,
               delta: Optional[float] = None,
               rng: Optional[np.random.Generator] = None,
               exact_threshold: int = EXACT_THRESHOLD_DEFAULT,
               max_samples: int = MAX_SAMPLES_DEFAULT) -> float:
    """Dispatch on the mechanism name ("proportional", "shapley-exact",
    "shapley-sampled")."""
    if mechanism == "proportional":
        return proportional_share(query)
    if mechanism == "shapley-exact":
        return shapley_exact(query, exact_threshold)
    if mechanism == "shapley-sampled":
        if epsilon is None or delta is None or rng is None:
            raise ConfigError("shapley-sampled needs epsilon, delta and an rng stream")
        return shapley_sampled(query, epsilon, delta, rng, max_samples)
    raise ConfigError(f"unknown mechanism {mechanism!r}")


# ---------------------------------------------------------------------------
# expansion certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionTerm:
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class RepExpansionConstants:
    """Per-exponent constants certifying the share bound

        f_{i,e} <= sigma_e + sum_j xi_j sum_k z_k (l - w_i)^{x_k} w_i^{y_k}

    with 0 <= x_k <= alpha_j - 1, 1 <= y_k <= alpha_j and x_k + y_k = alpha_j.
    """

    mechanism: str
    terms: tuple[tuple[ExpansionTerm, ...], ...]

    @property
    def z_max(self) -> float:
        return max(t.z for terms_j in self.terms for t in terms_j)

    def k_values(self) -> tuple[int, ...]:
        return tuple(len(terms_j) for terms_j in self.terms)


def _binom_real(alpha: float, k: int) -> float:
    num = 1.0
    for m in range(k):
        num *= alpha - m
    return num / math.factorial(k)


def rep_expansion_constants(mechanism: str, exponents: ExponentProfile) -> RepExpansionConstants:
    """Expansion constants for the two supported mechanisms.

    proportional: z_1 = z_2 = 2^{alpha-1};
    shapley: z_1 = 3^alpha, z_2 = 2 * binom(alpha, floor((alpha+1)/2)),
    both with (x_1, y_1) = (0, alpha) and (x_2, y_2) = (alpha-1, 1).
    """
    base = mechanism.split("-")[0]
    per_j = []
    for a in exponents.alphas:
        if base == "proportional":
            z1 = z2 = 2.0 ** (a - 1.0)
        elif base == "shapley":
            z1 = 3.0 ** a
            z2 = 2.0 * _binom_real(a, math.floor((a + 1.0) / 2.0))
        else:
            raise ConfigError(f"unknown mechanism {mechanism!r}")
        per_j.append((ExpansionTerm(0.0, a, z1), ExpansionTerm(a - 1.0, 1.0, z2)))
    return RepExpansionConstants(mechanism=base, terms=tuple(per_j))


@dataclass(frozen=True)
class ExpansionCheck:
    share: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.share <= self.bound * (1.0 + 1e-9) + 1e-12


def rep_expansion_check(mechanism: str, query: ShareQuery,
                        exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> ExpansionCheck:
    """Evaluate both sides of the expansion inequality on one query."""
    constants = rep_expansion_constants(mechanism, query.exponents)
    if constants.mechanism == "proportional":
        share = proportional_share(query)
    else:
        share = shapley_exact(query, exact_threshold)
    res = query.resource
    w = float(query.target_weight)
    rest = float(query.load - query.target_weight)
    bound = res.sigma
    for xi, terms_j in zip(res.xis, constants.terms):
        if not xi:
            continue
        bound += xi * sum(t.z * rest ** t.x * w ** t.y for t in terms_j)
    return ExpansionCheck(share=share, bound=bound)


def budget_balance_gap(mechanism: str, query_users: tuple[tuple[int, int], ...],
                       resource: ResourceParams, exponents: ExponentProfile,
                       exact_threshold: int = EXACT_THRESHOLD_DEFAULT) -> float:
    """Relative gap between the summed shares and the resource cost."""
    total = 0.0
    for i, _ in query_users:
        q = ShareQuery(resource, exponents, query_users, target=i)
        if mechanism == "proportional":
            total += proportional_share(q)
        else:
            total += shapley_exact(q, exact_threshold)
    full = rep_cost(resource, exponents, sum(w for _, w in query_users))
    return abs(total - full) / max(abs(full), 1e-12)
