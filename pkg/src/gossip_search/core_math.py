"""Shared numerics: binomial ratios, success probabilities, round pmfs and means.

Every model in the package reduces to a sequence of per-round success
probabilities S(1), S(2), ... that is turned into a distribution over the
round at which the file is first found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ConfigError, DomainError, TruncationError

DEFAULT_EPSILON = 1e-6
DEFAULT_ROUND_CAP = 10**6


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of one search model evaluation.

    ``num_nodes`` counts the initiator. Cooperation and stifling are mutually
    exclusive behaviours: a positive ``stifling`` requires ``cooperation == 1``.
    """

    num_nodes: int
    fanout: int = 1
    copies: int = 1
    cooperation: float = 1.0
    stifling: float = 0.0
    epsilon: float = DEFAULT_EPSILON
    round_cap: int = DEFAULT_ROUND_CAP

    def __post_init__(self):
        n, k, m = self.num_nodes, self.fanout, self.copies
        for name, value in (("num_nodes", n), ("fanout", k), ("copies", m), ("round_cap", self.round_cap)):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if n < 2:
            raise ConfigError(f"num_nodes must be >= 2, got {n}")
        if not 1 <= k <= n - 1:
            raise ConfigError(f"fanout must lie in [1, {n - 1}], got {k}")
        if not 1 <= m <= n - 1:
            raise ConfigError(f"copies must lie in [1, {n - 1}], got {m}")
        if not 0.0 <= self.cooperation <= 1.0:
            raise ConfigError(f"cooperation must lie in [0, 1], got {self.cooperation}")
        if not 0.0 <= self.stifling <= 1.0:
            raise ConfigError(f"stifling must lie in [0, 1], got {self.stifling}")
        if self.stifling > 0 and self.cooperation != 1.0:
            raise ConfigError("stifling requires cooperation == 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.round_cap < 1:
            raise ConfigError("round_cap must be positive")

    @property
    def stifler_mode(self) -> bool:
        return self.stifling > 0


@dataclass(frozen=True)
class RoundPmf:
    """Truncated distribution of the round at which the file is first found.

    ``probabilities[r - 1]`` is p(r). ``residual`` is the probability that the
    file is still unfound after ``r_max`` rounds. When the success probability
    is known to stay constant beyond ``r_max``, ``tail_success`` holds that
    constant and the tail can be summed in closed form.
    """

    probabilities: tuple[float, ...]
    residual: float
    tail_success: float | None = None

    @property
    def r_max(self) -> int:
        return len(self.probabilities)

    def total(self) -> float:
        return math.fsum(self.probabilities) + self.residual


@dataclass(frozen=True)
class SearchMetrics:
    mean_rounds: float
    mean_active: float
    source: str
    residual: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)


def binomial_ratio(a: int, b: int, k: int) -> float:
    """C(a, k) / C(b, k) as a product of k ratios, with C(a, k) = 0 for a < k."""
    if k < 0 or b < k:
        raise DomainError(f"C({b}, {k}) is zero or undefined")
    if a < k:
        return 0.0
    out = 1.0
    for j in range(k):
        out *= (a - j) / (b - j)
    return out


def binomial_ratio_exact(a: int, b: int, k: int) -> Fraction:
    if k < 0 or b < k:
        raise DomainError(f"C({b}, {k}) is zero or undefined")
    if a < k:
        return Fraction(0)
    return Fraction(math.comb(a, k), math.comb(b, k))


def _check_sizes(n, k, m):
    if isinstance(n, bool) or not all(isinstance(x, int) for x in (n, k, m)):
        raise ConfigError("num_nodes, fanout and copies must be integers")
    if n < 2 or not 1 <= k <= n - 1 or not 1 <= m <= n - 1:
        raise ConfigError(f"need 1 <= k, m <= N - 1; got N={n}, k={k}, m={m}")


def single_search_success(num_nodes: int, fanout: int, copies: int) -> float:
    """Probability that k distinct uniform queries among N - 1 nodes hit one of m holders."""
    _check_sizes(num_nodes, fanout, copies)
    free = num_nodes - 1 - copies
    if free < fanout:
        return 1.0
    return 1.0 - binomial_ratio(free, num_nodes - 1, fanout)


def conditional_search_success(num_nodes: int, active: int, fanout: int, copies: int) -> float:
    """Success probability of one k-query batch drawn from the N - v non-active nodes."""
    if active < 1:
        raise DomainError(f"active count must be >= 1, got {active}")
    remaining = num_nodes - active
    if fanout < 1 or fanout > remaining:
        raise DomainError(f"fanout {fanout} exceeds the {remaining} unqueried candidates")
    if copies < 1 or copies > remaining:
        raise DomainError(f"copies {copies} exceeds the {remaining} unqueried candidates")
    free = remaining - copies
    if free < fanout:
        return 1.0
    return 1.0 - binomial_ratio(free, remaining, fanout)


def round_pmf(
    successes: Iterable[float],
    epsilon: float = DEFAULT_EPSILON,
    round_cap: int = DEFAULT_ROUND_CAP,
) -> RoundPmf:
    """Turn per-round success probabilities into p(r) = S(r) * prod_{i<r} (1 - S(i)).

    Iteration stops at the first round after which the survival probability is
    below ``epsilon``; the sequence may be lazy and infinite.
    """
    probs: list[float] = []
    survival = 1.0
    for s in successes:
        if not 0.0 <= s <= 1.0:
            raise DomainError(f"success probability {s} outside [0, 1]")
        probs.append(survival * s)
        survival *= 1.0 - s
        if survival < epsilon:
            return RoundPmf(tuple(probs), survival)
        if len(probs) >= round_cap:
            break
    raise TruncationError(
        f"survival {survival:.3g} still above epsilon={epsilon} after {len(probs)} rounds",
        partial=RoundPmf(tuple(probs), survival),
    )


def metrics_from_pmf(
    pmf: RoundPmf,
    active_weights: Sequence[float],
    source: str,
    tail_weight: float | None = None,
) -> SearchMetrics:
    """Mean rounds and mean active nodes from a pmf and per-round active counts.

    ``active_weights[r - 1]`` is the active count credited to discovery at
    round r. Without a known tail the residual mass is dropped (bias below
    ``residual * r``); with ``pmf.tail_success`` and ``tail_weight`` set the
    geometric tail is added exactly.
    """
    if len(active_weights) < pmf.r_max:
        raise ValueError(f"{len(active_weights)} weights for {pmf.r_max} rounds")
    mean_r = math.fsum(r * p for r, p in enumerate(pmf.probabilities, start=1))
    mean_a = math.fsum(w * p for w, p in zip(active_weights, pmf.probabilities))
    residual = pmf.residual
    q = pmf.tail_success
    if q is not None and q > 0 and tail_weight is not None:
        # sum_{j>=1} (R + j) q (1-q)^{j-1} = R + 1/q, scaled by the surviving mass
        mean_r += residual * (pmf.r_max + 1.0 / q)
        mean_a += residual * tail_weight
        residual = 0.0
    return SearchMetrics(mean_r, mean_a, source, residual)
