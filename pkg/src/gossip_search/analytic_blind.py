"""Deterministic mean-field model of blind search.

The number of active nodes follows a deterministic recursion (cooperation or
stifling variant), rounded to the nearest integer, and each round is treated
as an independent trial with success 1 - (1 - p_s)^Â(r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .core_math import (
    RoundPmf,
    SearchConfig,
    SearchMetrics,
    metrics_from_pmf,
    round_pmf,
    single_search_success,
)


@dataclass(frozen=True)
class ActiveTrajectory:
    raw: tuple[float, ...]
    rounded: tuple[int, ...]
    behaviour: str  # "cooperative" or "stifler"


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _decay_exponent(num_nodes: int, fanout: int) -> float:
    # second-order expansion of -ln(1 - k/(N-1))
    d = num_nodes - 1
    return fanout / d + fanout * fanout / (2.0 * d * d)


def _cooperative_step(a: float, n: int, c: float, rate: float) -> float:
    return n * c + a * (1.0 - c) - (n - a) * c * math.exp(-a * rate)


def _stifler_step(a: float, n: int, s: float, rate: float) -> float:
    return 1.0 + (n - 1) * (1.0 - s) - (n - a) * (1.0 - s) * math.exp(-a * rate)


def iter_active(config: SearchConfig, behaviour: str | None = None) -> Iterator[float]:
    """Yield the unrounded active counts A(1) = 1, A(2), ... forever.

    ``behaviour`` forces the "cooperative" or "stifler" recursion; by default
    it follows ``config.stifler_mode``.
    """
    n = config.num_nodes
    rate = _decay_exponent(n, config.fanout)
    if behaviour is None:
        behaviour = "stifler" if config.stifler_mode else "cooperative"
    if behaviour not in ("cooperative", "stifler"):
        raise ValueError(f"unknown behaviour {behaviour!r}")
    if behaviour == "stifler":
        s = config.stifling

        def step(a):
            return _stifler_step(a, n, s, rate)
    else:
        c = config.cooperation

        def step(a):
            return _cooperative_step(a, n, c, rate)

    a = 1.0
    while True:
        yield a
        a = min(max(step(a), 1.0), float(n))


def _trajectory(config: SearchConfig, rounds: int, behaviour: str) -> ActiveTrajectory:
    raw = []
    for a in iter_active(config, behaviour):
        raw.append(a)
        if len(raw) >= rounds:
            break
    return ActiveTrajectory(tuple(raw), tuple(round_half_up(a) for a in raw), behaviour)


def cooperative_trajectory(config: SearchConfig, rounds: int) -> ActiveTrajectory:
    if config.stifler_mode:
        raise ValueError("cooperative_trajectory needs stifling == 0")
    return _trajectory(config, rounds, "cooperative")


def stifler_trajectory(config: SearchConfig, rounds: int) -> ActiveTrajectory:
    if config.cooperation != 1.0:
        raise ValueError("stifler_trajectory needs cooperation == 1")
    return _trajectory(config, rounds, "stifler")


@dataclass(frozen=True)
class BlindSolution:
    pmf: RoundPmf
    trajectory: ActiveTrajectory  # A(1) .. A(r_max + 1)
    single_success: float
    fixed_point_round: int | None


def solve_blind(config: SearchConfig) -> BlindSolution:
    """Trajectory and pmf in a single pass, stopping at the epsilon truncation point."""
    p_single = single_search_success(config.num_nodes, config.fanout, config.copies)
    raw: list[float] = []
    fixed: list[int] = []
    active = iter_active(config)

    def successes():
        a = next(active)
        raw.append(a)
        while True:
            nxt = next(active)
            raw.append(nxt)
            if nxt == a and not fixed:
                fixed.append(len(raw) - 1)
            yield 1.0 - (1.0 - p_single) ** round_half_up(a)
            a = nxt

    pmf = round_pmf(successes(), config.epsilon, config.round_cap)
    # raw holds A(1) .. A(r_max + 1); the recursion is a fixed point from fixed[0] on
    fixed_round = fixed[0] if fixed and fixed[0] <= pmf.r_max else None
    if fixed_round is not None:
        a_inf = round_half_up(raw[-1])
        pmf = RoundPmf(pmf.probabilities, pmf.residual, 1.0 - (1.0 - p_single) ** a_inf)
    behaviour = "stifler" if config.stifler_mode else "cooperative"
    traj = ActiveTrajectory(tuple(raw), tuple(round_half_up(a) for a in raw), behaviour)
    return BlindSolution(pmf, traj, p_single, fixed_round)


def blind_round_pmf(config: SearchConfig) -> RoundPmf:
    return solve_blind(config).pmf


def blind_metrics(config: SearchConfig) -> SearchMetrics:
    """Mean rounds and mean active nodes, crediting Â(r+1) to discovery at round r.

    For stiflers Â(r+1) counts nodes active upon discovery, not every node that
    was ever active.
    """
    sol = solve_blind(config)
    weights = sol.trajectory.rounded[1:]
    tail_weight = float(sol.trajectory.rounded[-1]) if sol.fixed_point_round else None
    m = metrics_from_pmf(sol.pmf, weights, "analytic-blind", tail_weight)
    return SearchMetrics(
        m.mean_rounds,
        m.mean_active,
        m.source,
        m.residual,
        {"r_max": sol.pmf.r_max, "p_single": sol.single_success},
    )


def location_probability(config: SearchConfig, r: int) -> float:
    """p(r) alone, in O(k + r) steps."""
    if r < 1:
        raise ValueError("round index must be >= 1")
    p_single = single_search_success(config.num_nodes, config.fanout, config.copies)
    survival = 1.0
    for i, a in enumerate(iter_active(config), start=1):
        s = 1.0 - (1.0 - p_single) ** round_half_up(a)
        if i == r:
            return survival * s
        survival *= 1.0 - s
