"""Seeded Monte-Carlo simulation of blind and smart gossip search.

Node 0 is the initiator. Every replication owns a PCG64 stream derived from
(master_seed, instance, run) through numpy's SeedSequence, so results do not
depend on the order in which replications are executed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core_math import SearchConfig
from .errors import ConfigError

RNG_ALGORITHM = "PCG64 (numpy SeedSequence spawn_key=(instance, run))"

BLIND = "blind"
SMART = "smart"


@dataclass(frozen=True)
class BehaviorProfile:
    """How queried nodes react.

    ``plain``: a queried inactive node becomes active with probability c, one
    trial per round however many queries it got. With ``persistent_refusal``
    a node that declines once never activates.
    ``stifler``: queried inactive nodes activate; at the end of every round
    each active non-initiator drops out with probability s.
    """

    mode: str = "plain"
    cooperation: float = 1.0
    stifling: float = 0.0
    persistent_refusal: bool = False

    def __post_init__(self):
        if self.mode not in ("plain", "stifler"):
            raise ConfigError(f"unknown behaviour mode {self.mode!r}")
        if self.mode == "plain" and self.stifling != 0.0:
            raise ConfigError("plain profile requires s = 0")
        if self.mode == "stifler" and self.cooperation != 1.0:
            raise ConfigError("stifler profile requires c = 1")

    @classmethod
    def from_config(cls, config: SearchConfig, persistent_refusal: bool = False) -> "BehaviorProfile":
        if config.stifler_mode:
            return cls("stifler", 1.0, config.stifling)
        return cls("plain", config.cooperation, 0.0, persistent_refusal)


@dataclass(frozen=True)
class RunRecord:
    rounds: int
    active: int
    queries: int
    instance: int = 0
    run: int = 0
    seed: int = 0


def _stream(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=key)))


def _blind_targets(rng, actives: np.ndarray, n: int, k: int) -> np.ndarray:
    # k distinct neighbours per active node, drawn from the N-1 other nodes
    if k == 1:
        picks = rng.integers(0, n - 1, size=(actives.size, 1))
    elif k == n - 1:
        picks = np.broadcast_to(np.arange(n - 1), (actives.size, k))
    else:
        picks = np.argpartition(rng.random((actives.size, n - 1)), k - 1, axis=1)[:, :k]
    return picks + (picks >= actives[:, None])


def _smart_targets(rng, n_active: int, candidates: np.ndarray, k: int) -> np.ndarray:
    if candidates.size <= k:
        # fewer candidates than fanout: query all of them
        return np.broadcast_to(candidates, (n_active, candidates.size))
    if k == 1:
        return candidates[rng.integers(0, candidates.size, size=(n_active, 1))]
    keys = rng.random((n_active, candidates.size))
    return candidates[np.argpartition(keys, k - 1, axis=1)[:, :k]]


def simulate_search(
    config: SearchConfig,
    variant: str,
    profile: BehaviorProfile,
    holders,
    rng: np.random.Generator,
    max_rounds: int | None = None,
) -> RunRecord:
    """One search until a file holder is queried.

    ``holders`` are the m non-initiator nodes that hold the file. The active
    count recorded is taken after the discovery round's activations and, for
    stiflers, after that round's stifling step.
    """
    if variant not in (BLIND, SMART):
        raise ConfigError(f"unknown variant {variant!r}")
    n, k = config.num_nodes, config.fanout
    idx = np.asarray(holders, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ConfigError(f"holder indices must lie in [1, {n - 1}]")
    holder = np.zeros(n, dtype=bool)
    holder[idx] = True
    if holder[0] or holder.sum() != config.copies:
        raise ConfigError("holders must be m distinct non-initiator nodes")
    cap = max_rounds or config.round_cap

    active = np.zeros(n, dtype=bool)
    active[0] = True
    queried = np.zeros(n, dtype=bool)
    queried[0] = True
    refused = np.zeros(n, dtype=bool)
    stifler = profile.mode == "stifler"
    c, s = profile.cooperation, profile.stifling
    queries = 0

    for rnd in range(1, cap + 1):
        actives = np.flatnonzero(active)
        if variant == BLIND:
            targets = _blind_targets(rng, actives, n, k)
        else:
            targets = _smart_targets(rng, actives.size, np.flatnonzero(~queried), k)
        queries += targets.size
        hit = np.unique(targets)
        found = bool(holder[hit].any())
        queried[hit] = True

        fresh = hit[~active[hit]]
        if stifler:
            active[fresh] = True
        else:
            if profile.persistent_refusal:
                fresh = fresh[~refused[fresh]]
            if c < 1.0:
                agree = rng.random(fresh.size) < c
                refused[fresh[~agree]] = True
                fresh = fresh[agree]
            active[fresh] = True
        if stifler and s > 0.0:
            drop = rng.random(n) < s
            drop[0] = False
            active &= ~drop
        if found:
            return RunRecord(rnd, int(active.sum()), queries)
    raise RuntimeError(f"search did not terminate within {cap} rounds")


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


@dataclass
class SimReport:
    config: SearchConfig
    variant: str
    profile: BehaviorProfile
    instances: int
    runs_per_instance: int
    master_seed: int
    records: list[RunRecord] = field(repr=False)
    rng_algorithm: str = RNG_ALGORITHM

    @property
    def replications(self) -> int:
        return len(self.records)

    def _column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def rounds(self) -> tuple[float, float]:
        return _mean_stderr(self._column("rounds"))

    @property
    def active(self) -> tuple[float, float]:
        return _mean_stderr(self._column("active"))

    @property
    def queries(self) -> tuple[float, float]:
        return _mean_stderr(self._column("queries"))

    def round_pmf(self, r_max: int | None = None) -> np.ndarray:
        """Empirical p(r) for r = 1..r_max."""
        rounds = self._column("rounds").astype(int)
        top = r_max or int(rounds.max())
        counts = np.bincount(rounds, minlength=top + 1)[1 : top + 1]
        return counts / rounds.size

    def summary(self) -> dict:
        return {
            "config": asdict(self.config),
            "variant": self.variant,
            "profile": asdict(self.profile),
            "instances": self.instances,
            "runs_per_instance": self.runs_per_instance,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "rng": self.rng_algorithm,
            "mean_rounds": self.rounds[0],
            "stderr_rounds": self.rounds[1],
            "mean_active": self.active[0],
            "stderr_active": self.active[1],
            "mean_queries": self.queries[0],
        }


def draw_placement(config: SearchConfig, master_seed: int, instance: int) -> np.ndarray:
    rng = _stream(master_seed, instance)
    return 1 + np.sort(rng.choice(config.num_nodes - 1, size=config.copies, replace=False))


def run_experiment(
    config: SearchConfig,
    variant: str = BLIND,
    profile: BehaviorProfile | None = None,
    instances: int = 100,
    runs_per_instance: int = 100,
    master_seed: int = 0,
    order=None,
) -> SimReport:
    """Replicate the search over random file placements.

    ``order`` optionally permutes the (instance, run) execution order; the
    report is identical for every order.
    """
    if instances < 1 or runs_per_instance < 1:
        raise ConfigError("instances and runs_per_instance must be >= 1")
    profile = profile or BehaviorProfile.from_config(config)
    placements = [draw_placement(config, master_seed, i) for i in range(instances)]
    cells = [(i, j) for i in range(instances) for j in range(runs_per_instance)]
    if order is not None:
        cells = [cells[idx] for idx in order]
    done = {}
    for i, j in cells:
        rec = simulate_search(config, variant, profile, placements[i], _stream(master_seed, i, j))
        done[(i, j)] = RunRecord(rec.rounds, rec.active, rec.queries, i, j, master_seed)
    records = [done[key] for key in sorted(done)]
    return SimReport(config, variant, profile, instances, runs_per_instance, master_seed, records)
