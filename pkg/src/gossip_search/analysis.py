"""Experiment orchestration: accuracy tables, model comparisons, scaling fits, timing, CSV."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import timeit
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .analytic_blind import blind_metrics, location_probability
from .analytic_smart import smart_metrics
from .core_math import SearchConfig, SearchMetrics
from .errors import ComparisonError, ConfigError, FitError
from .exact_blind import (
    AccuracyReport,
    build_exact_matrix,
    exact_metrics,
    relative_accuracy,
    unfound_probability,
)
from .simulator import BLIND, SMART, BehaviorProfile, SimReport, run_experiment

TABLE_KM = ((1, 1), (1, 3), (3, 1))
TABLE_N = (10, 20, 30, 40, 50)

# spec default points plus ten log-spaced points per decade
SCALING_GRID = tuple(
    sorted({10, 20, 30, 40, 50, 100, 1000, 10_000, 100_000} | set(np.round(np.logspace(1, 5, 41)).astype(int).tolist()))
)

CSV_COLUMNS = (
    "model",
    "variant",
    "N",
    "k",
    "m",
    "c",
    "s",
    "mean_rounds",
    "stderr_rounds",
    "mean_active",
    "stderr_active",
    "mean_queries",
    "replications",
    "seed",
)


# --- scaling fits -----------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    form: str  # "linear" (a*N + b) or "log" (a*log_base(N) + b)
    a: float
    b: float
    r_squared: float
    base: float | None
    grid: tuple[int, ...]

    def predict(self, n):
        n = np.asarray(n, dtype=float)
        x = n if self.form == "linear" else np.log(n) / math.log(self.base)
        return self.a * x + self.b


def fit_scaling(ns: Sequence[int], values: Sequence[float], form: str = "linear", base: float = math.e) -> FitResult:
    """Ordinary least squares of ``values`` against N or log N."""
    x = np.asarray(ns, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise FitError("need at least 3 grid points with matching values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("non-finite input")
    if form == "log":
        if np.any(x <= 0) or base <= 0 or base == 1:
            raise FitError("log fit needs positive N and a valid base")
        x = np.log(x) / math.log(base)
    elif form != "linear":
        raise FitError(f"unknown form {form!r}")
    if np.ptp(x) == 0:
        raise FitError("degenerate grid")
    a, b = np.polyfit(x, y, 1)
    resid = y - (a * x + b)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid**2).sum()) / ss_tot
    return FitResult(form, float(a), float(b), min(max(r2, 0.0), 1.0), base if form == "log" else None, tuple(int(n) for n in ns))


def fit_log_bases(ns, values) -> list[FitResult]:
    """The log fit under base 2, e and 10. R^2 is base-independent; the slope is not."""
    return [fit_scaling(ns, values, "log", b) for b in (2.0, math.e, 10.0)]


def scaling_series(grid: Iterable[int] = SCALING_GRID, fanout=1, copies=1, cooperation=1.0, stifling=0.0):
    """Blind analytic (E[r], E[A]) over a grid of network sizes."""
    ns, rounds, active = [], [], []
    for n in grid:
        m = blind_metrics(SearchConfig(int(n), fanout, copies, cooperation, stifling))
        ns.append(int(n))
        rounds.append(m.mean_rounds)
        active.append(m.mean_active)
    return ns, rounds, active


# --- accuracy table --------------------------------------------------------


@dataclass(frozen=True)
class AccuracyCell:
    k: int
    m: int
    N: int
    metric: str  # "rounds" or "active"
    report: AccuracyReport


def accuracy_table(km_grid=TABLE_KM, n_grid=TABLE_N, epsilon: float = 1e-6) -> list[AccuracyCell]:
    """Relative accuracy of the approximate blind model against the exact chain (c = 1)."""
    cells = []
    for k, m in km_grid:
        for n in n_grid:
            cfg = SearchConfig(n, k, m, epsilon=epsilon)
            ex, ap = exact_metrics(cfg), blind_metrics(cfg)
            cells.append(AccuracyCell(k, m, n, "rounds", relative_accuracy(ex.mean_rounds, ap.mean_rounds)))
            cells.append(AccuracyCell(k, m, n, "active", relative_accuracy(ex.mean_active, ap.mean_active)))
    return cells


def format_accuracy_table(cells: Sequence[AccuracyCell]) -> str:
    out = []
    ns = sorted({c.N for c in cells})
    for metric, title in (("rounds", "(a) mean number of rounds"), ("active", "(b) mean number of nodes activated")):
        out.append(title)
        out.append(" " * 12 + "".join(f"{'N=' + str(n):>9}" for n in ns))
        for k, m in dict.fromkeys((c.k, c.m) for c in cells):
            row = {c.N: c.report.formatted for c in cells if c.metric == metric and (c.k, c.m) == (k, m)}
            out.append(f"k={k}, m={m}".ljust(12) + "".join(f"{row.get(n, ''):>9}" for n in ns))
        out.append("")
    return "\n".join(out)


# --- comparisons ------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    config: SearchConfig
    variant: str = BLIND
    persistent_refusal: bool = False

    @property
    def profile(self) -> BehaviorProfile:
        return BehaviorProfile.from_config(self.config, self.persistent_refusal)


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    baseline: SearchMetrics
    variant: SearchMetrics
    change_rounds: float
    change_active: float


def relative_change(baseline: float, variant: float) -> float:
    return (variant - baseline) / baseline * 100.0


def report_metrics(report: SimReport) -> SearchMetrics:
    (r, r_se), (a, a_se), (q, _) = report.rounds, report.active, report.queries
    return SearchMetrics(
        r, a, "simulation", 0.0, {"stderr_rounds": r_se, "stderr_active": a_se, "mean_queries": q, "replications": report.replications}
    )


def evaluate(spec: ExperimentSpec, source="simulation", instances=100, runs=100, seed=0) -> SearchMetrics:
    if source == "simulation":
        rep = run_experiment(spec.config, spec.variant, spec.profile, instances, runs, seed)
        return report_metrics(rep)
    if source != "analytic":
        raise ConfigError(f"unknown source {source!r}")
    if spec.variant == BLIND:
        return blind_metrics(spec.config)
    if spec.config.stifler_mode:
        raise ConfigError("there is no analytic model for smart search with stiflers")
    return smart_metrics(spec.config)


def tradeoff_comparisons(num_nodes: int = 50) -> list[tuple[str, ExperimentSpec, ExperimentSpec]]:
    """The trade-off comparisons discussed for blind/smart search and stiflers."""
    n = num_nodes
    base = ExperimentSpec(SearchConfig(n, 1, 1))
    half = ExperimentSpec(SearchConfig(n, 1, 1, cooperation=0.5))
    return [
        ("m 1->3 (blind, c=1)", base, ExperimentSpec(SearchConfig(n, 1, 3))),
        ("k 1->3 (blind, c=1)", base, ExperimentSpec(SearchConfig(n, 3, 1))),
        ("smart vs blind (c=1)", base, ExperimentSpec(base.config, SMART)),
        ("smart vs blind (c=0.5)", half, ExperimentSpec(half.config, SMART)),
        ("stifler s=0.2 vs plain c=0.8", ExperimentSpec(SearchConfig(n, 1, 1, cooperation=0.8)), ExperimentSpec(SearchConfig(n, 1, 1, stifling=0.2))),
        ("stifler s=0.5 vs plain c=0.5", half, ExperimentSpec(SearchConfig(n, 1, 1, stifling=0.5))),
        (
            "smart vs blind (stiflers s=0.8)",
            ExperimentSpec(SearchConfig(n, 1, 1, stifling=0.8)),
            ExperimentSpec(SearchConfig(n, 1, 1, stifling=0.8), SMART),
        ),
    ]


def compare_models(pairs, source="simulation", instances=100, runs=100, seed=0) -> list[ComparisonRow]:
    """Relative change (variant - baseline) / baseline in percent, per pair.

    Every spec is evaluated once with the shared master seed.
    """
    cache: dict[ExperimentSpec, SearchMetrics] = {}

    def get(spec):
        if spec not in cache:
            cache[spec] = evaluate(spec, source, instances, runs, seed)
        return cache[spec]

    rows = []
    for label, b, v in pairs:
        if b.config.num_nodes != v.config.num_nodes or b.config.epsilon != v.config.epsilon:
            raise ComparisonError(f"{label}: baseline and variant differ in N or epsilon")
        mb, mv = get(b), get(v)
        rows.append(
            ComparisonRow(
                label, mb, mv, relative_change(mb.mean_rounds, mv.mean_rounds), relative_change(mb.mean_active, mv.mean_active)
            )
        )
    return rows


# --- complexity -------------------------------------------------------------


def _best_time(fn, repeat=5) -> float:
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def exact_location_probability(config: SearchConfig, r: int) -> float:
    """B(r) - B(r-1) from scratch: exact matrix, then two binary powers."""
    q = build_exact_matrix(config, cache=False)
    miss = unfound_probability(config.num_nodes, config.copies)
    p = np.linalg.matrix_power(q.dense, r)[0] @ miss
    prev = np.linalg.matrix_power(q.dense, r - 1)[0] @ miss if r > 1 else 1.0
    return float(prev - p)


def growth_exponent(ns, times) -> float:
    return float(np.polyfit(np.log(ns), np.log(times), 1)[0])


def benchmark_complexity(n_grid=(50, 100, 200), r: int = 16, fanout: int = 1, copies: int = 1, repeat: int = 3):
    """Wall time of p(r) under the approximate and the exact model across N."""
    rows = []
    for n in n_grid:
        cfg = SearchConfig(n, fanout, copies)
        t_approx = _best_time(lambda: location_probability(cfg, r), repeat)
        t_exact = min(timeit.repeat(lambda: exact_location_probability(cfg, r), repeat=repeat, number=1))
        rows.append({"N": n, "r": r, "approx_seconds": t_approx, "exact_seconds": t_exact})
    ns = [row["N"] for row in rows]
    return {
        "rows": rows,
        "approx_exponent": growth_exponent(ns, [row["approx_seconds"] for row in rows]),
        "exact_exponent": growth_exponent(ns, [row["exact_seconds"] for row in rows]),
    }


# --- CSV --------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentCell:
    model: str
    variant: str
    N: int
    k: int
    m: int
    c: float
    s: float
    mean_rounds: float
    stderr_rounds: float | None
    mean_active: float
    stderr_active: float | None
    mean_queries: float | None
    replications: int | None
    seed: int | None

    def sort_key(self):
        return (self.model, self.variant, self.N, self.k, self.m, self.c, self.s)


_INT_COLS = {"N", "k", "m", "replications", "seed"}
_STR_COLS = {"model", "variant"}


def cell_from_metrics(metrics: SearchMetrics, config: SearchConfig, variant: str, seed: int | None = None) -> ExperimentCell:
    extra = metrics.extra
    return ExperimentCell(
        metrics.source,
        variant,
        config.num_nodes,
        config.fanout,
        config.copies,
        float(config.cooperation),
        float(config.stifling),
        float(metrics.mean_rounds),
        extra.get("stderr_rounds"),
        float(metrics.mean_active),
        extra.get("stderr_active"),
        extra.get("mean_queries"),
        extra.get("replications"),
        seed,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cells_to_csv(cells: Iterable[ExperimentCell]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cell in sorted(cells, key=ExperimentCell.sort_key):
        writer.writerow([_fmt(getattr(cell, col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def cells_from_csv(text: str) -> list[ExperimentCell]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        kwargs = {}
        for f in fields(ExperimentCell):
            raw = row[f.name]
            if f.name in _STR_COLS:
                kwargs[f.name] = raw
            elif raw == "":
                kwargs[f.name] = None
            elif f.name in _INT_COLS:
                kwargs[f.name] = int(raw)
            else:
                kwargs[f.name] = float(raw)
        out.append(ExperimentCell(**kwargs))
    return out


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cells_to_json(cells: Iterable[ExperimentCell]) -> str:
    return json.dumps([asdict(c) for c in sorted(cells, key=ExperimentCell.sort_key)], indent=2) + "\n"


def manifest(command: str, arguments: dict, seeds: Sequence[int] = ()) -> dict:
    return {"tool": "gossip-search", "version": __version__, "command": command, "arguments": arguments, "seeds": list(seeds)}
