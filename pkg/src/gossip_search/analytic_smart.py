"""Markov model of smart search built on a generalized occupancy distribution.

Smart search never re-queries a node, so one round in which x active nodes
each send k distinct queries to the N - x unqueried nodes is an occupancy
experiment: x groups of k balls thrown into N - x bins. Inclusion-exclusion
sums are evaluated on integers and only converted to float at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .core_math import (
    RoundPmf,
    SearchConfig,
    SearchMetrics,
    binomial_ratio,
    conditional_search_success,
    metrics_from_pmf,
    round_pmf,
)
from .errors import DomainError, NumericalInstabilityError, SizeBudgetError

DEFAULT_SIZE_BUDGET = 200

Prob = Union[Fraction, float]


def _check_occupancy(v, r, k, n):
    if n <= k:
        raise DomainError(f"need more bins than balls per group (n={n}, k={k})")
    if k < 1 or r < 1:
        raise DomainError(f"need k >= 1 and r >= 1 (k={k}, r={r})")
    if not 0 <= v <= n - k:
        raise DomainError(f"empty-bin count {v} outside [0, {n - k}]")


def occupancy_exactly_empty(v: int, r: int, k: int, n: int, exact: bool = True) -> Prob:
    """Probability that exactly v of n bins stay empty after r groups of k distinct balls.

    With ``exact=False`` the alternating sum is done in floating point and a
    negative or >1 result raises NumericalInstabilityError.
    """
    _check_occupancy(v, r, k, n)
    rest = n - v
    if exact:
        total = sum((-1) ** i * math.comb(rest, i) * math.comb(rest - i, k) ** r for i in range(rest - k + 1))
        return Fraction(math.comb(n, v) * total, math.comb(n, k) ** r)
    terms = [(-1) ** i * math.comb(rest, i) * binomial_ratio(rest - i, n, k) ** r for i in range(rest - k + 1)]
    value = math.comb(n, v) * math.fsum(terms)
    if not -1e-12 <= value <= 1 + 1e-12:
        raise NumericalInstabilityError(f"occupancy p_{v}({r},{k},{n}) evaluated to {value}")
    return min(max(value, 0.0), 1.0)


def _occupancy_row(r: int, k: int, n: int) -> list[Fraction]:
    """Exact p_v(r, k, n) for v = 0 .. n - k."""
    powers = [math.comb(t, k) ** r for t in range(n + 1)]
    denom = powers[n]
    row = []
    for v in range(n - k + 1):
        rest = n - v
        total = 0
        for i in range(rest - k + 1):
            term = math.comb(rest, i) * powers[rest - i]
            total += -term if i & 1 else term
        row.append(Fraction(math.comb(n, v) * total, denom))
    return row


def smart_transition_row(active: int, num_nodes: int, fanout: int) -> list[Fraction]:
    """Distribution of the next active count given ``active`` fully cooperative actives.

    Returned list is indexed by state (index 0 unused, length N + 1). When no
    more than k unqueried nodes remain every one of them is queried.
    """
    n_nodes = num_nodes
    if not 1 <= active <= n_nodes:
        raise DomainError(f"active count {active} outside [1, {n_nodes}]")
    row = [Fraction(0)] * (n_nodes + 1)
    unqueried = n_nodes - active
    if unqueried == 0:
        row[n_nodes] = Fraction(1)
        return row
    if unqueried <= fanout:
        row[n_nodes] = Fraction(1)
        return row
    occ = _occupancy_row(active, fanout, unqueried)
    for v, p in enumerate(occ):
        row[n_nodes - v] = p
    return row


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    return Fraction(repr(float(c)))


def cooperation_mixing(row: Sequence[Prob], active: int, cooperation) -> list[Prob]:
    """Thin each newly queried node independently with probability c of becoming active."""
    exact = isinstance(row[active], Fraction) or any(isinstance(p, Fraction) for p in row)
    c = _as_fraction(cooperation) if exact else float(cooperation)
    if c == 1:
        return list(row)
    zero = Fraction(0) if exact else 0.0
    out = [zero] * len(row)
    for j in range(active, len(row)):
        p = row[j]
        if not p:
            continue
        d = j - active
        for alpha in range(d + 1):
            out[active + alpha] += p * math.comb(d, alpha) * c**alpha * (1 - c) ** (d - alpha)
    return out


@dataclass(frozen=True)
class TransitionMatrix:
    """Round-to-round transition probabilities over active counts 1..N.

    ``dense[i - 1, j - 1]`` is the probability of moving from i to j actives.
    ``rows`` keeps the rational entries when the matrix was built exactly.
    """

    order: int
    dense: np.ndarray
    exact: bool
    rows: tuple | None = None

    def row(self, i: int) -> np.ndarray:
        return self.dense[i - 1]


def _rows_to_matrix(n: int, rows: list[list], exact: bool) -> TransitionMatrix:
    dense = np.zeros((n, n))
    for i, row in enumerate(rows, start=1):
        dense[i - 1] = [float(p) for p in row[1:]]
    stored = tuple(tuple(r[1:]) for r in rows) if exact else None
    return TransitionMatrix(n, dense, exact, stored)


def _float_row(active, n, k):
    unqueried = n - active
    row = [0.0] * (n + 1)
    if unqueried <= k:
        row[n] = 1.0
        return row
    for v in range(unqueried - k + 1):
        row[n - v] = occupancy_exactly_empty(v, active, k, unqueried, exact=False)
    if abs(math.fsum(row) - 1.0) > 1e-9:
        raise NumericalInstabilityError(f"row {active} sums to {math.fsum(row)}")
    return row


@lru_cache(maxsize=64)
def _smart_matrix(n: int, k: int, c: float, exact: bool) -> TransitionMatrix:
    rows = []
    for i in range(1, n + 1):
        if exact:
            row = smart_transition_row(i, n, k)
        else:
            try:
                row = _float_row(i, n, k)
            except NumericalInstabilityError:
                row = [float(p) for p in smart_transition_row(i, n, k)]
        rows.append(cooperation_mixing(row, i, c))
    return _rows_to_matrix(n, rows, exact)


def build_transition_matrix(
    config: SearchConfig, exact: bool = True, budget: int = DEFAULT_SIZE_BUDGET
) -> TransitionMatrix:
    """Full smart-search matrix including cooperation; state N is absorbing."""
    if config.num_nodes > budget:
        raise SizeBudgetError(
            f"N={config.num_nodes} exceeds the exact-model budget of {budget}; "
            "use the blind analytic model or simulation"
        )
    return _smart_matrix(config.num_nodes, config.fanout, float(config.cooperation), exact)


def success_vector(config: SearchConfig) -> np.ndarray:
    """1 - (1 - p_s(v))^v for v = 1..N, with the clamped fanout near exhaustion."""
    n, k, m = config.num_nodes, config.fanout, config.copies
    out = np.empty(n)
    for v in range(1, n + 1):
        remaining = n - v
        if m > remaining or k >= remaining:
            ps = 1.0
        else:
            ps = conditional_search_success(n, v, k, m)
        out[v - 1] = 1.0 - (1.0 - ps) ** v
    return out


def smart_success_by_round(config: SearchConfig, r: int, matrix: TransitionMatrix | None = None) -> float:
    """S(r): chance that round r succeeds, averaging over Q^(r-1)(1, .).

    This is not a cdf; successive values are not differences of one another.
    """
    if r < 1:
        raise DomainError("round index must be >= 1")
    q = matrix or build_transition_matrix(config)
    dist = np.linalg.matrix_power(q.dense, r - 1)[0]
    return float(dist @ success_vector(config))


def smart_metrics(config: SearchConfig, matrix: TransitionMatrix | None = None) -> SearchMetrics:
    q = matrix or build_transition_matrix(config)
    succ = success_vector(config)
    states = np.arange(1, config.num_nodes + 1, dtype=float)
    weights: list[float] = []
    stable: list[float] = []
    dist = np.zeros(config.num_nodes)
    dist[0] = 1.0

    def successes():
        nonlocal dist
        while True:
            nxt = dist @ q.dense
            weights.append(float(nxt @ states))
            s = float(dist @ succ)
            if np.array_equal(nxt, dist):
                stable.append(s)
            yield min(s, 1.0)
            dist = nxt

    pmf = round_pmf(successes(), config.epsilon, config.round_cap)
    tail_weight = None
    if stable:
        pmf = RoundPmf(pmf.probabilities, pmf.residual, stable[-1])
        tail_weight = weights[-1]
    m = metrics_from_pmf(pmf, weights, "analytic-smart", tail_weight)
    return SearchMetrics(m.mean_rounds, m.mean_active, m.source, m.residual, {"r_max": pmf.r_max})
