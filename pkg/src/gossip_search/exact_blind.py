"""Exact Markov chain for blind search with fully cooperative nodes.

State is the number of active nodes. In one round each of the i actives
picks k distinct targets among its N - 1 neighbours. A fixed set of t
inactive nodes escapes every query with probability
[C(N-1-t, k) / C(N-1, k)]^i, and inclusion-exclusion over the set of
inactive nodes that do get hit gives the transition row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .analytic_smart import DEFAULT_SIZE_BUDGET, TransitionMatrix
from .core_math import SearchConfig, SearchMetrics
from .errors import AccuracyUndefinedError, ConfigError, DomainError, SizeBudgetError


def miss_set_probability(t: int, active: int, num_nodes: int, fanout: int) -> Fraction:
    """Chance that t given inactive nodes receive no query from ``active`` nodes."""
    pool = num_nodes - 1
    return Fraction(math.comb(pool - t, fanout), math.comb(pool, fanout)) ** active


def exact_blind_transition_row(active: int, num_nodes: int, fanout: int) -> list[Fraction]:
    """P(i -> i + w) for w = 0 .. N - i, indexed by destination state (index 0 unused)."""
    n, k, i = num_nodes, fanout, active
    if not 1 <= i <= n:
        raise DomainError(f"active count {i} outside [1, {n}]")
    if not 1 <= k <= n - 1:
        raise DomainError(f"fanout {k} outside [1, {n - 1}]")
    row = [Fraction(0)] * (n + 1)
    inactive = n - i
    # a set of t inactive nodes is missed iff every active draws from the other N-1-t
    powers = [math.comb(u, k) ** i for u in range(n)]
    denom = powers[n - 1]
    for w in range(inactive + 1):
        total = 0
        for l in range(w + 1):
            term = math.comb(w, l) * powers[i - 1 + w - l]
            total += -term if l & 1 else term
        row[i + w] = Fraction(math.comb(inactive, w) * total, denom)
    return row


@lru_cache(maxsize=64)
def _exact_matrix(n: int, k: int) -> TransitionMatrix:
    rows = [exact_blind_transition_row(i, n, k) for i in range(1, n + 1)]
    dense = np.array([[float(p) for p in r[1:]] for r in rows])
    return TransitionMatrix(n, dense, True, tuple(tuple(r[1:]) for r in rows))


def _check(config: SearchConfig, budget: int):
    if config.cooperation != 1.0 or config.stifling != 0.0:
        raise ConfigError("the exact blind model covers c = 1 without stiflers only")
    if config.num_nodes > budget:
        raise SizeBudgetError(f"N={config.num_nodes} exceeds the exact-model budget of {budget}")


def build_exact_matrix(config: SearchConfig, budget: int = DEFAULT_SIZE_BUDGET, cache: bool = True) -> TransitionMatrix:
    _check(config, budget)
    if cache:
        return _exact_matrix(config.num_nodes, config.fanout)
    return _exact_matrix.__wrapped__(config.num_nodes, config.fanout)


def unfound_probability(num_nodes: int, copies: int, exact: bool = False):
    """C(N-i, m) / C(N-1, m) for i = 1..N: no holder among the i - 1 non-initiator actives."""
    denom = math.comb(num_nodes - 1, copies)
    values = [Fraction(math.comb(num_nodes - i, copies), denom) for i in range(1, num_nodes + 1)]
    if exact:
        return values
    return np.array([float(v) for v in values])


def exact_find_by(config: SearchConfig, r: int, matrix: TransitionMatrix | None = None) -> float:
    """B(r), the probability that a holder has been queried within r rounds.

    Uses binary powering of the matrix, so cost is O(log r) multiplications.
    """
    if r < 0:
        raise DomainError("round index must be >= 0")
    if r == 0:
        return 0.0
    q = matrix or build_exact_matrix(config)
    dist = np.linalg.matrix_power(q.dense, r)[0]
    return float(1.0 - dist @ unfound_probability(config.num_nodes, config.copies))


@dataclass(frozen=True)
class FindByCurve:
    """B(0) = 0, B(1), ..., B(R); element type is Fraction in exact mode."""

    values: tuple

    def pmf(self) -> tuple:
        b = self.values
        return tuple(b[r] - b[r - 1] for r in range(1, len(b)))


def find_by_curve(config: SearchConfig, rounds: int, exact: bool = False) -> FindByCurve:
    """B(r) for r = 0..rounds by incremental multiplication."""
    q = build_exact_matrix(config)
    miss = unfound_probability(config.num_nodes, config.copies, exact)
    n = config.num_nodes
    if exact:
        dist = [Fraction(0)] * n
        dist[0] = Fraction(1)
        values = [Fraction(0)]
        for _ in range(rounds):
            nxt = [Fraction(0)] * n
            for i, pi in enumerate(dist):
                if pi:
                    for j, qij in enumerate(q.rows[i]):
                        if qij:
                            nxt[j] += pi * qij
            dist = nxt
            values.append(1 - sum(p * h for p, h in zip(dist, miss)))
        return FindByCurve(tuple(values))
    dist = np.zeros(n)
    dist[0] = 1.0
    values = [0.0]
    for _ in range(rounds):
        dist = dist @ q.dense
        values.append(float(1.0 - dist @ miss))
    return FindByCurve(tuple(values))


def exact_metrics(config: SearchConfig, matrix: TransitionMatrix | None = None) -> SearchMetrics:
    """Mean rounds and mean active-at-discovery under the exact chain.

    The active count credited to a discovery at round r is the state the
    chain enters in that round, weighted by the joint probability of the
    transition and of the first holder being reached in it.
    """
    q = matrix or build_exact_matrix(config)
    miss = unfound_probability(config.num_nodes, config.copies)
    states = np.arange(1, config.num_nodes + 1, dtype=float)
    # found[i, j]: holder first reached when moving from i to j actives
    found = np.clip(miss[:, None] - miss[None, :], 0.0, None)
    step = q.dense * found
    dist = np.zeros(config.num_nodes)
    dist[0] = 1.0
    mean_r = mean_a = 0.0
    survival = 1.0
    r = 0
    pmf = []
    while survival >= config.epsilon:
        r += 1
        if r > config.round_cap:
            break
        joint = dist @ step
        p = float(joint.sum())
        pmf.append(p)
        mean_r += r * p
        mean_a += float(joint @ states)
        dist = dist @ q.dense
        survival = float(dist @ miss)
    return SearchMetrics(mean_r, mean_a, "exact-blind", survival, {"pmf": tuple(pmf)})


@dataclass(frozen=True)
class AccuracyReport:
    exact: float
    approx: float
    accuracy: float

    @property
    def formatted(self) -> str:
        return f"{self.accuracy:.2f}"


def relative_accuracy(exact: float, approx: float) -> AccuracyReport:
    """(1 - |exact - approx| / exact) * 100, clamped to [0, 100]."""
    if exact == 0:
        raise AccuracyUndefinedError("relative accuracy is undefined for an exact value of zero")
    acc = (1.0 - abs(exact - approx) / abs(exact)) * 100.0
    return AccuracyReport(exact, approx, min(max(acc, 0.0), 100.0))


def compare_metrics(exact: SearchMetrics, approx: SearchMetrics) -> dict[str, AccuracyReport]:
    return {
        "rounds": relative_accuracy(exact.mean_rounds, approx.mean_rounds),
        "active": relative_accuracy(exact.mean_active, approx.mean_active),
    }
